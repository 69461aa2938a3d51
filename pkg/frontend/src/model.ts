/** Panel state. The panel holds no lock logic of its own: every displayed
 * fact is the service's latest snapshot, either fetched or carried by an
 * event. */

import { PanelEvent, Snapshot } from "./api.js";

export type Connection = "connected" | "reconnecting";

export const BLANK_ROW = " ".repeat(20);

export const INITIAL_SNAPSHOT: Snapshot = {
  lcd: [BLANK_ROW, BLANK_ROW],
  lock: "closed",
  buzzer: "off",
  mode: "BOOT",
  t_ms: 0,
  sleeping: false,
  attempts: 0,
};

export class PanelModel {
  snapshot: Snapshot = INITIAL_SNAPSHOT;
  connection: Connection = "reconnecting";
  heldKeys = new Set<string>();

  applySnapshot(snapshot: Snapshot): void {
    this.snapshot = snapshot;
  }

  applyEvent(event: PanelEvent): void {
    // Events carry the full snapshot, so replaying a stream always resyncs
    // the model to the service's latest state.
    this.snapshot = event.snapshot;
  }
}
