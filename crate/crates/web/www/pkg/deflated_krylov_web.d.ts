/* tslint:disable */
/* eslint-disable */

/**
 * Breakdown geometry: basis `wᵢ + w_{i+m}`, `i < k`, optionally perturbed
 * by a matrix of 2-norm `eps`, started from the breakdown guess plus
 * `guess_noise` times a Gaussian vector.
 */
export function breakdown(m: number, k: number, seed: bigint, eps: number, guess_noise: number): string;

/**
 * Plain MINRES against three deflated variants on the spectrum `±√j`,
 * `j = 1..m`, deflating `k` eigenvalues on each side.
 */
export function convergence(m: number, k: number, seed: bigint, tol: number): string;

/**
 * Eigenvalues of `P_A A` next to `{0}^{2k} ∪ {±√j : j > k}`.
 */
export function deflated_spectrum(m: number, k: number, seed: bigint): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly breakdown: (a: number, b: number, c: bigint, d: number, e: number) => [number, number];
    readonly convergence: (a: number, b: number, c: bigint, d: number) => [number, number];
    readonly deflated_spectrum: (a: number, b: number, c: bigint) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
