/* tslint:disable */
/* eslint-disable */

/**
 * Rows `[d/λ, Ω₁₂, Γ₁₂, Γ₊, Γ₋]` on a logarithmic grid of perpendicular dipoles.
 */
export function couplings(d_min: number, d_max: number, n: number): Float64Array;

/**
 * Rows `[ϑ, P_G, P₊, P₋, P_X]` at `t_end` over `n_phases` relative phases.
 */
export function phase_scan(d: number, alpha1_pi: number, alpha2_pi: number, tau: number, t_end: number, n_phases: number): Float64Array;

/**
 * Rows `[t, P_G, P₊, P₋, P_X]` from the ground state up to `t_end`.
 */
export function populations(d: number, alpha1_pi: number, alpha2_pi: number, tau: number, theta: number, t_end: number, n: number): Float64Array;

/**
 * Preset pulse parameters `[α₁/π, α₂/π, τ, ϑ]` for a target.
 */
export function preset(name: string): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly couplings: (a: number, b: number, c: number) => [number, number, number, number];
    readonly phase_scan: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly populations: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly preset: (a: number, b: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
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
