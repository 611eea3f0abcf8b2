export interface SelectionState {
  subjectUser: string;
  /** null means no item chosen yet; dependent views stay blank. */
  chosenItem: string | null;
  /** Empty array means "no brush": dependent views cover all raters. */
  brushedUsers: string[];
}

export type SelectionChange = "subject" | "item" | "brush";

export type SelectionListener = (state: SelectionState, change: SelectionChange) => void;

function sameMembers(a: string[], b: string[]): boolean {
  if (a.length !== b.length) return false;
  const left = [...a].sort();
  const right = [...b].sort();
  return left.every((value, index) => value === right[index]);
}

/**
 * Holds the dashboard selection triple and notifies listeners with the kind
 * of change, so the controller can refresh exactly the dependent views.
 *
 * Reset rules: a new subject clears both the chosen item and the brush; a new
 * item clears the brush. No-op updates (same subject, same item, same brush
 * membership) do not emit.
 */
export class SelectionStore {
  private state: SelectionState;
  private listeners: SelectionListener[] = [];

  constructor(subjectUser: string) {
    this.state = { subjectUser, chosenItem: null, brushedUsers: [] };
  }

  get current(): SelectionState {
    return {
      subjectUser: this.state.subjectUser,
      chosenItem: this.state.chosenItem,
      brushedUsers: [...this.state.brushedUsers],
    };
  }

  subscribe(listener: SelectionListener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((entry) => entry !== listener);
    };
  }

  setSubject(user: string): void {
    if (user === this.state.subjectUser) return;
    this.state = { subjectUser: user, chosenItem: null, brushedUsers: [] };
    this.emit("subject");
  }

  chooseItem(item: string | null): void {
    if (item === this.state.chosenItem) return;
    this.state = { ...this.state, chosenItem: item, brushedUsers: [] };
    this.emit("item");
  }

  setBrush(users: string[]): void {
    if (sameMembers(users, this.state.brushedUsers)) return;
    this.state = { ...this.state, brushedUsers: [...users] };
    this.emit("brush");
  }

  clearBrush(): void {
    this.setBrush([]);
  }

  private emit(change: SelectionChange): void {
    const snapshot = this.current;
    for (const listener of [...this.listeners]) listener(snapshot, change);
  }
}
