/** Lock and buzzer indicators. */

import { Snapshot } from "./api.js";

export function renderIndicators(doc: Document, snapshot: Snapshot): HTMLElement {
  const bar = doc.createElement("div");
  bar.className = "indicators";

  const lock = doc.createElement("div");
  lock.className = `indicator lock ${snapshot.lock}`;
  lock.dataset.state = snapshot.lock;
  lock.textContent = snapshot.lock === "open" ? "\u{1F513} open" : "\u{1F512} locked";
  bar.appendChild(lock);

  const buzzer = doc.createElement("div");
  buzzer.className = `indicator buzzer ${snapshot.buzzer}`;
  buzzer.dataset.state = snapshot.buzzer;
  buzzer.textContent = snapshot.buzzer === "on" ? "\u{1F514} ALARM" : "\u{1F515} quiet";
  bar.appendChild(buzzer);

  const mode = doc.createElement("div");
  mode.className = "indicator mode";
  mode.textContent = snapshot.sleeping ? "sleeping" : snapshot.mode.toLowerCase();
  bar.appendChild(mode);

  return bar;
}
