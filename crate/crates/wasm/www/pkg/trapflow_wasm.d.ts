/* tslint:disable */
/* eslint-disable */

/**
 * `P(W(t_i) <= x_i for all i)`.
 */
export function extremal_fdd(times: Float64Array, levels: Float64Array): number;

/**
 * Jumps of one extremal-process path on `[0, horizon]` above `floor`, as
 * `[t0, w0, t1, w1, ...]`.
 */
export function extremal_path(horizon: number, floor: number, seed: number): Float64Array;

/**
 * `[monte_carlo, stderr, exact]` for the record range of i.i.d.
 * `sigma` draws on `[epsilon, em]` jumping over `[a, b]`.
 */
export function record_gap(epsilon: number, em: number, a: number, b: number, sequences: number, seed: number): Float64Array;

/**
 * Rescaled clock `(S(t r_n) / t_n)^alpha` of one REM trap-model replica on
 * the `n`-cube at `points + 1` even times in `[0, horizon]`, as
 * `[t0, v0, t1, v1, ...]`.
 */
export function rem_clock_path(n: number, alpha: number, beta: number, horizon: number, points: number, seed: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly extremal_fdd: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly extremal_path: (a: number, b: number, c: number) => [number, number, number, number];
    readonly record_gap: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly rem_clock_path: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
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
