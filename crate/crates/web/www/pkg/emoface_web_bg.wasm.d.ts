/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_shapeexplorer_free: (a: number, b: number) => void;
export const decide_top_two: (a: number, b: number) => [number, number, number, number];
export const mel_bands: () => number;
export const mfsc_from_samples: (a: number, b: number, c: number) => [number, number, number, number];
export const mfsc_from_wav: (a: number, b: number) => [number, number, number, number];
export const shapeexplorer_mode_std: (a: number, b: number) => number;
export const shapeexplorer_modes: (a: number) => number;
export const shapeexplorer_new: (a: bigint) => [number, number, number];
export const shapeexplorer_render: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const shapeexplorer_variance_covered: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
