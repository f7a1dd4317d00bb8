/** View state: mode, selection, follow toggle — and the mode guards.
 *
 * Edit interactions are disabled in runtime mode and vice versa, mirroring
 * the gateway's 409 contract, so normal flows never provoke a 4xx.
 */

export type Mode = "edit" | "runtime";

export type Selection =
  | { kind: "none" }
  | { kind: "node"; id: string }
  | { kind: "segment"; id: string }
  | { kind: "drone"; id: string };

export type EditTool = "select" | "add-node" | "connect" | "waypoint" | "delete";

export interface ViewState {
  mode: Mode;
  tool: EditTool;
  selection: Selection;
  followDrone: string | null;
  connectFrom: string | null; // first node of a click-pair connection
  runState: "idle" | "paused" | "running" | "finished" | "aborted";
}

export function initialViewState(): ViewState {
  return {
    mode: "edit",
    tool: "select",
    selection: { kind: "none" },
    followDrone: null,
    connectFrom: null,
    runState: "idle",
  };
}

export class Store {
  private state: ViewState = initialViewState();
  private listeners: Array<(s: ViewState) => void> = [];

  get(): ViewState {
    return this.state;
  }

  subscribe(listener: (s: ViewState) => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  update(patch: Partial<ViewState>): ViewState {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) {
      listener(this.state);
    }
    return this.state;
  }

  setMode(mode: Mode): ViewState {
    // Leaving edit mode drops edit-only state; leaving runtime drops follow.
    if (mode === this.state.mode) {
      return this.state;
    }
    return this.update({
      mode,
      tool: "select",
      connectFrom: null,
      selection: { kind: "none" },
      followDrone: mode === "runtime" ? this.state.followDrone : null,
    });
  }
}

/** Edit interactions are legal only in edit mode with no active run. */
export function canEdit(state: ViewState): boolean {
  return state.mode === "edit" && (state.runState === "idle" || state.runState === "finished");
}

/** Runtime steering is legal only in runtime mode with a session present. */
export function canSteer(state: ViewState): boolean {
  return state.mode === "runtime" && state.runState !== "idle";
}

export function toggleFollow(state: ViewState, droneId: string): string | null {
  return state.followDrone === droneId ? null : droneId;
}
