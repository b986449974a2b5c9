/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_circlesresult_free: (a: number, b: number) => void;
export const __wbg_generativeresult_free: (a: number, b: number) => void;
export const bloch: (a: number, b: number) => [number, number, number, number];
export const circles: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number];
export const circlesresult_boundary: (a: number) => number;
export const circlesresult_exact_accuracy: (a: number) => number;
export const circlesresult_points: (a: number) => [number, number];
export const circlesresult_shot_accuracies: (a: number) => [number, number];
export const generative: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: bigint) => [number, number, number];
export const generativeresult_cloud: (a: number) => [number, number];
export const generativeresult_losses: (a: number) => [number, number];
export const generativeresult_path: (a: number) => [number, number];
export const generativeresult_samples: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
