/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_fieldplot_free: (a: number, b: number) => void;
export const compareMethods: (a: number, b: number, c: number) => [number, number, number, number];
export const convergenceTable: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const fieldplot_coords: (a: number) => [number, number];
export const fieldplot_energy: (a: number) => number;
export const fieldplot_errors: (a: number) => [number, number];
export const fieldplot_h1: (a: number) => number;
export const fieldplot_l2: (a: number) => number;
export const fieldplot_ndofs: (a: number) => number;
export const fieldplot_triangles: (a: number) => [number, number];
export const fieldplot_values: (a: number) => [number, number];
export const solveField: (a: number, b: number, c: number, d: number) => [number, number, number];
export const __externref_table_alloc: () => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
