/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_barrierprofile_free: (a: number, b: number) => void;
export const __wbg_decaycurve_free: (a: number, b: number) => void;
export const __wbg_heatmap_free: (a: number, b: number) => void;
export const barrierProfile: (a: number, b: number, c: number, d: number) => [number, number, number];
export const barrierprofile_scaled: (a: number) => [number, number];
export const barrierprofile_values: (a: number) => [number, number];
export const barrierprofile_xs: (a: number) => [number, number];
export const decayCurve: (a: number, b: number, c: number, d: number) => [number, number, number];
export const decaycurve_fitStart: (a: number) => number;
export const decaycurve_logC: (a: number) => number;
export const decaycurve_mu: (a: number) => number;
export const decaycurve_norms: (a: number) => [number, number];
export const decaycurve_rate: (a: number) => number;
export const decaycurve_times: (a: number) => [number, number];
export const eigenfunction: (a: number, b: number, c: number) => [number, number, number];
export const heatmap_halfWidth: (a: number) => number;
export const heatmap_mu: (a: number) => number;
export const heatmap_residual: (a: number) => number;
export const heatmap_side: (a: number) => number;
export const heatmap_values: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
