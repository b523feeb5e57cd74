/* tslint:disable */
/* eslint-disable */

export class AtomView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    freqs: Float64Array;
    im: Float64Array;
    jmax: number;
    kmax: number;
    magnitude: Float64Array;
    re: Float64Array;
    times: Float64Array;
}

/**
 * Partition windows over the positive half of the band, one row per index.
 */
export class Partition {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    count: number;
    freqs: Float64Array;
    lefts: Float64Array;
    positions: Float64Array;
    rights: Float64Array;
    sum: Float64Array;
    /**
     * Row-major, `count × freqs.len()`.
     */
    windows: Float64Array;
}

export class Spectrogram {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    omegas: Float64Array;
    /**
     * `|V|²`, row-major over `(ω, x)`.
     */
    power: Float64Array;
    times: Float64Array;
}

export function atom_at(alpha: number, a: number, j: number, k: number): AtomView;

export function partition(alpha: number, b: number): Partition;

export function spectrogram(alpha: number, rate: number, bins: number): Spectrogram;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_atomview_free: (a: number, b: number) => void;
    readonly __wbg_get_atomview_freqs: (a: number) => [number, number];
    readonly __wbg_get_atomview_im: (a: number) => [number, number];
    readonly __wbg_get_atomview_jmax: (a: number) => number;
    readonly __wbg_get_atomview_kmax: (a: number) => number;
    readonly __wbg_get_atomview_magnitude: (a: number) => [number, number];
    readonly __wbg_get_atomview_re: (a: number) => [number, number];
    readonly __wbg_get_atomview_times: (a: number) => [number, number];
    readonly __wbg_get_partition_count: (a: number) => number;
    readonly __wbg_get_partition_freqs: (a: number) => [number, number];
    readonly __wbg_get_partition_lefts: (a: number) => [number, number];
    readonly __wbg_get_partition_positions: (a: number) => [number, number];
    readonly __wbg_get_partition_rights: (a: number) => [number, number];
    readonly __wbg_get_partition_sum: (a: number) => [number, number];
    readonly __wbg_get_partition_windows: (a: number) => [number, number];
    readonly __wbg_get_spectrogram_omegas: (a: number) => [number, number];
    readonly __wbg_get_spectrogram_power: (a: number) => [number, number];
    readonly __wbg_get_spectrogram_times: (a: number) => [number, number];
    readonly __wbg_partition_free: (a: number, b: number) => void;
    readonly __wbg_set_atomview_freqs: (a: number, b: number, c: number) => void;
    readonly __wbg_set_atomview_im: (a: number, b: number, c: number) => void;
    readonly __wbg_set_atomview_jmax: (a: number, b: number) => void;
    readonly __wbg_set_atomview_kmax: (a: number, b: number) => void;
    readonly __wbg_set_atomview_magnitude: (a: number, b: number, c: number) => void;
    readonly __wbg_set_atomview_re: (a: number, b: number, c: number) => void;
    readonly __wbg_set_atomview_times: (a: number, b: number, c: number) => void;
    readonly __wbg_set_partition_count: (a: number, b: number) => void;
    readonly __wbg_set_partition_freqs: (a: number, b: number, c: number) => void;
    readonly __wbg_set_partition_lefts: (a: number, b: number, c: number) => void;
    readonly __wbg_set_partition_positions: (a: number, b: number, c: number) => void;
    readonly __wbg_set_partition_rights: (a: number, b: number, c: number) => void;
    readonly __wbg_set_partition_sum: (a: number, b: number, c: number) => void;
    readonly __wbg_set_partition_windows: (a: number, b: number, c: number) => void;
    readonly __wbg_set_spectrogram_omegas: (a: number, b: number, c: number) => void;
    readonly __wbg_set_spectrogram_power: (a: number, b: number, c: number) => void;
    readonly __wbg_set_spectrogram_times: (a: number, b: number, c: number) => void;
    readonly __wbg_spectrogram_free: (a: number, b: number) => void;
    readonly atom_at: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly partition: (a: number, b: number) => [number, number, number];
    readonly spectrogram: (a: number, b: number, c: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
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
