/* tslint:disable */
/* eslint-disable */

/**
 * Wigner function of the reflected mode conditioned on the reported qubit
 * outcome (`0` = g, `1` = e, anything else unconditional), on a square
 * grid of `points × points` over [−half, half]². Row-major in Im α.
 */
export function conditional_wigner(mean_photons: number, outcome: number, half: number, points: number): Float64Array;

/**
 * `[η, dark count, n_0, P_0, n_1, P_1, …]` for the table device.
 */
export function efficiency_curve(gate_interval_ns: number, kappa_in_mhz: number, t2_star_us: number, points: number): Float64Array;

/**
 * Reflectance and phase around ω_c. Rows of
 * `[detuning_mhz, |r_g|², arg r_g, |r_e|², arg r_e]`.
 */
export function spectrum(chi_mhz: number, kappa_ex_mhz: number, kappa_in_mhz: number, span_mhz: number, points: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly conditional_wigner: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly efficiency_curve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly spectrum: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
