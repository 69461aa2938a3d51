/** Panel assembly: static keypad plus live sections re-rendered from the
 * latest snapshot. All state comes from the service; the panel never
 * simulates anything itself. */

import { ApiError, LockApi, Snapshot } from "./api.js";
import { renderEeprom } from "./eeprom.js";
import { renderIndicators } from "./indicators.js";
import { renderKeypad, shortcutFor } from "./keypad.js";
import { renderLcd } from "./lcd.js";
import { PanelModel } from "./model.js";

export interface PanelOptions {
  reconnectDelayMs?: number;
}

export class Panel {
  readonly model = new PanelModel();
  private readonly banner: HTMLElement;
  private readonly lcdBox: HTMLElement;
  private readonly indicatorBox: HTMLElement;
  private readonly eepromBox: HTMLElement;
  private readonly toast: HTMLElement;
  private eepromHex = "";
  private unsubscribe: (() => void) | null = null;
  private readonly reconnectDelayMs: number;

  constructor(
    private readonly doc: Document,
    mount: HTMLElement,
    private readonly api: LockApi,
    options: PanelOptions = {},
  ) {
    this.reconnectDelayMs = options.reconnectDelayMs ?? 1000;
    mount.classList.add("panel");

    this.banner = doc.createElement("div");
    this.banner.className = "banner";
    mount.appendChild(this.banner);

    this.lcdBox = doc.createElement("div");
    this.lcdBox.className = "lcd-box";
    mount.appendChild(this.lcdBox);

    this.indicatorBox = doc.createElement("div");
    this.indicatorBox.className = "indicator-box";
    mount.appendChild(this.indicatorBox);

    // The keypad is built once: pointer capture must keep targeting the
    // same elements across renders while a key is held.
    mount.appendChild(
      renderKeypad(
        doc,
        {
          onPress: (sym) => this.sendKey(sym, "press"),
          onRelease: (sym) => this.sendKey(sym, "release"),
        },
        this.model.heldKeys,
      ),
    );

    this.eepromBox = doc.createElement("div");
    this.eepromBox.className = "eeprom-box";
    mount.appendChild(this.eepromBox);

    this.toast = doc.createElement("div");
    this.toast.className = "toast";
    mount.appendChild(this.toast);

    doc.addEventListener("keydown", (ev) => {
      const key = ev as KeyboardEvent;
      const sym = shortcutFor(key.key);
      if (!sym || key.repeat || this.model.heldKeys.has(sym)) return;
      this.model.heldKeys.add(sym);
      this.sendKey(sym, "press");
    });
    doc.addEventListener("keyup", (ev) => {
      const sym = shortcutFor((ev as KeyboardEvent).key);
      if (!sym || !this.model.heldKeys.has(sym)) return;
      this.model.heldKeys.delete(sym);
      this.sendKey(sym, "release");
    });

    this.render();
  }

  async connect(): Promise<void> {
    // Subscribe before the state fetch so no change can fall in between;
    // events carry full snapshots, so a stale order still converges.
    this.unsubscribe?.();
    this.unsubscribe = this.api.subscribe(
      (event) => {
        this.model.applyEvent(event);
        this.render();
      },
      () => this.connectionLost(),
    );
    try {
      this.model.applySnapshot(await this.api.getState());
      this.model.connection = "connected";
      this.render();
      await this.refreshEeprom();
    } catch {
      this.connectionLost();
    }
  }

  disconnect(): void {
    this.unsubscribe?.();
    this.unsubscribe = null;
  }

  async refreshEeprom(): Promise<void> {
    this.eepromHex = await this.api.getEeprom();
    this.render();
  }

  get snapshot(): Snapshot {
    return this.model.snapshot;
  }

  private connectionLost(): void {
    this.model.connection = "reconnecting";
    this.render();
    if (this.reconnectDelayMs > 0) {
      setTimeout(() => void this.connect(), this.reconnectDelayMs);
    }
  }

  private sendKey(sym: string, action: "press" | "release"): void {
    this.api.sendKey(sym, action).catch(async (err) => {
      this.showToast(err instanceof ApiError ? err.message : "service unreachable");
      try {
        this.model.applySnapshot(await this.api.getState());
        this.render();
      } catch {
        this.connectionLost();
      }
    });
  }

  private showToast(message: string): void {
    this.toast.textContent = message;
    this.toast.classList.add("visible");
    setTimeout(() => this.toast.classList.remove("visible"), 3000);
  }

  private render(): void {
    const snap = this.model.snapshot;
    const connected = this.model.connection === "connected";
    this.banner.textContent = connected ? "" : "reconnecting to the lock service…";
    this.banner.classList.toggle("visible", !connected);
    this.doc.querySelectorAll(".panel").forEach((el) =>
      el.classList.toggle("disconnected", !connected));

    this.lcdBox.replaceChildren(renderLcd(this.doc, snap.lcd));
    this.indicatorBox.replaceChildren(renderIndicators(this.doc, snap));
    this.eepromBox.replaceChildren(
      renderEeprom(this.doc, this.eepromHex, {
        onUpload: async (hex) => {
          await this.api.putEeprom(hex);
          await this.refreshEeprom();
        },
      }),
    );
  }
}
