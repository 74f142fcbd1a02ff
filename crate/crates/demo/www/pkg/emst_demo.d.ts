/* tslint:disable */
/* eslint-disable */

/**
 * Empirical rate at which a random grid shift separates two points at distance `w`.
 */
export function cut_probability_demo(w: number, side: number, d: number, trials: number, seed: number): string;

/**
 * Mean leftover components after each compression round, against the `(3/4)^h` bound.
 */
export function leader_compression_demo(graph: string, n: number, rounds: number, trials: number, seed: number): string;

/**
 * Generates `n` planar points and runs the whole pipeline on them.
 */
export function run_pipeline_demo(kind: string, n: number, seed: number, strategy: string, h: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly cut_probability_demo: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly leader_compression_demo: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number];
    readonly run_pipeline_demo: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
