/* tslint:disable */
/* eslint-disable */

/**
 * PCA shape space fitted on jittered synthetic mouth articulations.
 */
export class ShapeExplorer {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Standard deviation of mode `k`, for scaling sliders.
     */
    mode_std(k: number): number;
    modes(): number;
    constructor(seed: bigint);
    /**
     * SVG of the shape for coefficients given in units of each mode's std.
     */
    render(sigmas: Float64Array, size: number): string;
    variance_covered(): number;
}

/**
 * Top-two decision for a 7-way histogram; returns the decision as JSON.
 * The input is renormalized first so sliders need not sum to one.
 */
export function decide_top_two(weights: Float64Array): string;

export function mel_bands(): number;

/**
 * Same as [`mfsc_from_wav`] for raw mono samples.
 */
export function mfsc_from_samples(samples: Float64Array, sample_rate: number): Float64Array;

/**
 * Log mel energies of a WAV file, frame-major, `MEL_BANDS` values per frame.
 */
export function mfsc_from_wav(bytes: Uint8Array): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_shapeexplorer_free: (a: number, b: number) => void;
    readonly decide_top_two: (a: number, b: number) => [number, number, number, number];
    readonly mel_bands: () => number;
    readonly mfsc_from_samples: (a: number, b: number, c: number) => [number, number, number, number];
    readonly mfsc_from_wav: (a: number, b: number) => [number, number, number, number];
    readonly shapeexplorer_mode_std: (a: number, b: number) => number;
    readonly shapeexplorer_modes: (a: number) => number;
    readonly shapeexplorer_new: (a: bigint) => [number, number, number];
    readonly shapeexplorer_render: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly shapeexplorer_variance_covered: (a: number) => number;
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
