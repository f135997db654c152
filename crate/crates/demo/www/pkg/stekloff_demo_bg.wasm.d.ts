/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_snapshot_free: (a: number, b: number) => void;
export const snapshot_converged: (a: number) => number;
export const snapshot_iterations: (a: number) => number;
export const snapshot_kRef: (a: number) => number;
export const snapshot_n: (a: number) => number;
export const snapshot_residual: (a: number) => number;
export const snapshot_waveNumber: (a: number) => [number, number];
export const snapshot_waveReal: (a: number) => [number, number];
export const solvePointSource: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const solveVelocityField: (a: number, b: number, c: number) => [number, number, number];
export const stekloffEigenvalues: (a: number, b: number, c: number) => [number, number, number, number];
export const __externref_table_alloc: () => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
