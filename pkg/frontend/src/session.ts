// Per-tab session state. Persisted on every change so a refresh mid-job
// lands back where the user was: same scene, same region draft, and the
// active job resumes from polling, not from scratch.

import type { RegionDraft } from "./region";
import { normalized } from "./region";

export interface ViewState {
  sliceZ: number;
  vminDbm: number;
  vmaxDbm: number;
  /** job ids whose CDFs the comparator shows */
  comparedPlanIds: string[];
}

export interface UiSession {
  sceneId: string | null;
  regionDraft: RegionDraft | null;
  activeJobId: string | null;
  view: ViewState;
}

export function freshSession(): UiSession {
  return {
    sceneId: null,
    regionDraft: null,
    activeJobId: null,
    view: { sliceZ: 1.5, vminDbm: -120, vmaxDbm: -30, comparedPlanIds: [] },
  };
}

interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

const KEY = "radioplan-ui-session";

export function saveSession(s: UiSession, storage: StorageLike): void {
  const doc = {
    ...s,
    regionDraft: s.regionDraft === null ? null : normalized(s.regionDraft),
  };
  storage.setItem(KEY, JSON.stringify(doc));
}

export function loadSession(storage: StorageLike): UiSession {
  const raw = storage.getItem(KEY);
  if (raw === null) return freshSession();
  try {
    const doc = JSON.parse(raw);
    const base = freshSession();
    return {
      sceneId: typeof doc.sceneId === "string" ? doc.sceneId : null,
      regionDraft: doc.regionDraft ?? null,
      activeJobId: typeof doc.activeJobId === "string" ? doc.activeJobId : null,
      view: { ...base.view, ...(doc.view ?? {}) },
    };
  } catch {
    return freshSession();
  }
}
