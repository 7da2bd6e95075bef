/* tslint:disable */
/* eslint-disable */

/**
 * A solved field ready for plotting.
 */
export class FieldPlot {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Vertex coordinates as `x0, y0, x1, y1, ...`.
     */
    coords(): Float64Array;
    energy(): number;
    /**
     * `u - u_h` at the vertices.
     */
    errors(): Float64Array;
    h1(): number;
    l2(): number;
    ndofs(): number;
    /**
     * Vertex ids, three per triangle.
     */
    triangles(): Uint32Array;
    /**
     * Discrete solution at the vertices.
     */
    values(): Float64Array;
}

/**
 * All three methods on the same meshes.
 */
export function compareMethods(k: number, n: number, levels: number): string;

/**
 * Convergence table as markdown, or CSV when `csv` is set.
 */
export function convergenceTable(method: string, k: number, n: number, levels: number, csv: boolean): string;

/**
 * Solves on the `n × n` structured mesh.
 */
export function solveField(method: string, k: number, n: number): FieldPlot;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_fieldplot_free: (a: number, b: number) => void;
    readonly compareMethods: (a: number, b: number, c: number) => [number, number, number, number];
    readonly convergenceTable: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly fieldplot_coords: (a: number) => [number, number];
    readonly fieldplot_energy: (a: number) => number;
    readonly fieldplot_errors: (a: number) => [number, number];
    readonly fieldplot_h1: (a: number) => number;
    readonly fieldplot_l2: (a: number) => number;
    readonly fieldplot_ndofs: (a: number) => number;
    readonly fieldplot_triangles: (a: number) => [number, number];
    readonly fieldplot_values: (a: number) => [number, number];
    readonly solveField: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly __externref_table_alloc: () => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
