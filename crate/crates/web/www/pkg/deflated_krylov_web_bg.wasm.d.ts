/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const breakdown: (a: number, b: number, c: bigint, d: number, e: number) => [number, number];
export const convergence: (a: number, b: number, c: bigint, d: number) => [number, number];
export const deflated_spectrum: (a: number, b: number, c: bigint) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
