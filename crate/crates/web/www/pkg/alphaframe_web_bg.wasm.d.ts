/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_atomview_free: (a: number, b: number) => void;
export const __wbg_get_atomview_freqs: (a: number) => [number, number];
export const __wbg_get_atomview_im: (a: number) => [number, number];
export const __wbg_get_atomview_jmax: (a: number) => number;
export const __wbg_get_atomview_kmax: (a: number) => number;
export const __wbg_get_atomview_magnitude: (a: number) => [number, number];
export const __wbg_get_atomview_re: (a: number) => [number, number];
export const __wbg_get_atomview_times: (a: number) => [number, number];
export const __wbg_get_partition_count: (a: number) => number;
export const __wbg_get_partition_freqs: (a: number) => [number, number];
export const __wbg_get_partition_lefts: (a: number) => [number, number];
export const __wbg_get_partition_positions: (a: number) => [number, number];
export const __wbg_get_partition_rights: (a: number) => [number, number];
export const __wbg_get_partition_sum: (a: number) => [number, number];
export const __wbg_get_partition_windows: (a: number) => [number, number];
export const __wbg_get_spectrogram_omegas: (a: number) => [number, number];
export const __wbg_get_spectrogram_power: (a: number) => [number, number];
export const __wbg_get_spectrogram_times: (a: number) => [number, number];
export const __wbg_partition_free: (a: number, b: number) => void;
export const __wbg_set_atomview_freqs: (a: number, b: number, c: number) => void;
export const __wbg_set_atomview_im: (a: number, b: number, c: number) => void;
export const __wbg_set_atomview_jmax: (a: number, b: number) => void;
export const __wbg_set_atomview_kmax: (a: number, b: number) => void;
export const __wbg_set_atomview_magnitude: (a: number, b: number, c: number) => void;
export const __wbg_set_atomview_re: (a: number, b: number, c: number) => void;
export const __wbg_set_atomview_times: (a: number, b: number, c: number) => void;
export const __wbg_set_partition_count: (a: number, b: number) => void;
export const __wbg_set_partition_freqs: (a: number, b: number, c: number) => void;
export const __wbg_set_partition_lefts: (a: number, b: number, c: number) => void;
export const __wbg_set_partition_positions: (a: number, b: number, c: number) => void;
export const __wbg_set_partition_rights: (a: number, b: number, c: number) => void;
export const __wbg_set_partition_sum: (a: number, b: number, c: number) => void;
export const __wbg_set_partition_windows: (a: number, b: number, c: number) => void;
export const __wbg_set_spectrogram_omegas: (a: number, b: number, c: number) => void;
export const __wbg_set_spectrogram_power: (a: number, b: number, c: number) => void;
export const __wbg_set_spectrogram_times: (a: number, b: number, c: number) => void;
export const __wbg_spectrogram_free: (a: number, b: number) => void;
export const atom_at: (a: number, b: number, c: number, d: number) => [number, number, number];
export const partition: (a: number, b: number) => [number, number, number];
export const spectrogram: (a: number, b: number, c: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_start: () => void;
