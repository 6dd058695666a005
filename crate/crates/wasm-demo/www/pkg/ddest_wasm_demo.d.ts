/* tslint:disable */
/* eslint-disable */

export function ambiguity(rows: number, cols: number, span: number): Float64Array;

export function dd_magnitude(tau_us: number, nu_khz: number, paths: number, seed: number, rotate_l_n: number): Float64Array;

export function grid_size(): number;

export function interpolation_sweep(tau_us: number, nu_khz: number, l_m: number, snr_db: number, seed: number): Float64Array;

export function pilot_spacings(): Uint32Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly ambiguity: (a: number, b: number, c: number) => [number, number];
    readonly dd_magnitude: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly grid_size: () => number;
    readonly interpolation_sweep: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly pilot_spacings: () => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
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
