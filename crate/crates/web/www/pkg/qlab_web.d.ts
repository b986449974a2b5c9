/* tslint:disable */
/* eslint-disable */

export class CirclesResult {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Decision radius, `rho_max / √2`.
     */
    readonly boundary: number;
    readonly exact_accuracy: number;
    /**
     * Flat rows of `[x, y, label, predicted, p0]`.
     */
    readonly points: Float64Array;
    readonly shot_accuracies: Float64Array;
}

export class GenerativeResult {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Flat `[x1, x2]` training points.
     */
    readonly cloud: Float64Array;
    /**
     * Loss at epochs `0..=epochs`.
     */
    readonly losses: Float64Array;
    /**
     * Flat decoded `[x1, x2]` after each epoch, starting at epoch 0.
     */
    readonly path: Float64Array;
    /**
     * Flat `[x1, x2]` decoded from finite-shot estimates.
     */
    readonly samples: Float64Array;
}

export function bloch(x1: number, x2: number): Float64Array;

export function circles(n: number, noise: number, shots: number, repetitions: number, seed: bigint): CirclesResult;

export function generative(cx: number, cy: number, spread: number, epochs: number, lr: number, shots: number, count: number, seed: bigint): GenerativeResult;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_circlesresult_free: (a: number, b: number) => void;
    readonly __wbg_generativeresult_free: (a: number, b: number) => void;
    readonly bloch: (a: number, b: number) => [number, number, number, number];
    readonly circles: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number];
    readonly circlesresult_boundary: (a: number) => number;
    readonly circlesresult_exact_accuracy: (a: number) => number;
    readonly circlesresult_points: (a: number) => [number, number];
    readonly circlesresult_shot_accuracies: (a: number) => [number, number];
    readonly generative: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: bigint) => [number, number, number];
    readonly generativeresult_cloud: (a: number) => [number, number];
    readonly generativeresult_losses: (a: number) => [number, number];
    readonly generativeresult_path: (a: number) => [number, number];
    readonly generativeresult_samples: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
