/* tslint:disable */
/* eslint-disable */

/**
 * Row-major `n x n` image plus a few scalars for the caption.
 */
export class Snapshot {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly converged: boolean;
    readonly iterations: number;
    readonly kRef: number;
    readonly n: number;
    readonly residual: number;
    readonly waveNumber: Float64Array;
    /**
     * Real part of the solution.
     */
    readonly waveReal: Float64Array;
}

export function solvePointSource(k: number, n: number, x: number, y: number): Float64Array;

export function solveVelocityField(field: number, freq: number, n: number): Snapshot;

export function stekloffEigenvalues(n: number, eta: number, how_many: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_snapshot_free: (a: number, b: number) => void;
    readonly snapshot_converged: (a: number) => number;
    readonly snapshot_iterations: (a: number) => number;
    readonly snapshot_kRef: (a: number) => number;
    readonly snapshot_n: (a: number) => number;
    readonly snapshot_residual: (a: number) => number;
    readonly snapshot_waveNumber: (a: number) => [number, number];
    readonly snapshot_waveReal: (a: number) => [number, number];
    readonly solvePointSource: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly solveVelocityField: (a: number, b: number, c: number) => [number, number, number];
    readonly stekloffEigenvalues: (a: number, b: number, c: number) => [number, number, number, number];
    readonly __externref_table_alloc: () => number;
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
