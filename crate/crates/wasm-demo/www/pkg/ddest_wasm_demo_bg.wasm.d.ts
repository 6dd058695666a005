/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const ambiguity: (a: number, b: number, c: number) => [number, number];
export const dd_magnitude: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const grid_size: () => number;
export const interpolation_sweep: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const pilot_spacings: () => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
