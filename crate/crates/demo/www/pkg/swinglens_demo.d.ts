/* tslint:disable */
/* eslint-disable */

/**
 * Straightness labels and shot shape of one launch-monitor reading.
 */
export function classify_shot(direction_angle: number, spin_axis: number, direction_threshold: number, spin_threshold: number): string;

/**
 * Stick figure and metric values of one event of a synthetic swing after
 * sideways head and hip displacement.
 */
export function pose_metrics(seed: number, event_index: number, head_shift: number, hip_shift: number): string;

/**
 * Trains an additive model on planted shape functions and returns each
 * learned curve against the centred ground truth.
 */
export function train_shapes(seed: number, samples: number, epochs: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly classify_shot: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly pose_metrics: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly train_shapes: (a: number, b: number, c: number) => [number, number, number, number];
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
