/* tslint:disable */
/* eslint-disable */

export class BarrierProfile {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * `I_θ(w_γ)(x) · d(x)^(2s−γ)`, `d = 1 − |x|²`.
     */
    readonly scaled: Float64Array;
    /**
     * `I_θ(w_γ)(x)`.
     */
    readonly values: Float64Array;
    readonly xs: Float64Array;
}

export class DecayCurve {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly fitStart: number;
    /**
     * The fit is `exp(log_c − rate t)`.
     */
    readonly logC: number;
    readonly mu: number;
    /**
     * `‖u(·, t)‖_∞` at each time.
     */
    readonly norms: Float64Array;
    /**
     * Fitted rate over the trailing window.
     */
    readonly rate: number;
    readonly times: Float64Array;
}

/**
 * Row-major grid values; nodes outside the disk hold zero.
 */
export class Heatmap {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * The grid covers `[−half_width, half_width]²`.
     */
    readonly halfWidth: number;
    readonly mu: number;
    readonly residual: number;
    readonly side: number;
    readonly values: Float64Array;
}

export function barrierProfile(s: number, gamma: number, angle: number, samples: number): BarrierProfile;

export function decayCurve(s: number, h: number, directions: number, t_end: number): DecayCurve;

/**
 * Principal eigenfunction of the unit disk, sup-normalized and negative.
 */
export function eigenfunction(s: number, h: number, directions: number): Heatmap;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_barrierprofile_free: (a: number, b: number) => void;
    readonly __wbg_decaycurve_free: (a: number, b: number) => void;
    readonly __wbg_heatmap_free: (a: number, b: number) => void;
    readonly barrierProfile: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly barrierprofile_scaled: (a: number) => [number, number];
    readonly barrierprofile_values: (a: number) => [number, number];
    readonly barrierprofile_xs: (a: number) => [number, number];
    readonly decayCurve: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly decaycurve_fitStart: (a: number) => number;
    readonly decaycurve_logC: (a: number) => number;
    readonly decaycurve_mu: (a: number) => number;
    readonly decaycurve_norms: (a: number) => [number, number];
    readonly decaycurve_rate: (a: number) => number;
    readonly decaycurve_times: (a: number) => [number, number];
    readonly eigenfunction: (a: number, b: number, c: number) => [number, number, number];
    readonly heatmap_halfWidth: (a: number) => number;
    readonly heatmap_mu: (a: number) => number;
    readonly heatmap_residual: (a: number) => number;
    readonly heatmap_side: (a: number) => number;
    readonly heatmap_values: (a: number) => [number, number];
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
