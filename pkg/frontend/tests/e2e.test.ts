/** End-to-end: a scripted browser session against the real Python service,
 * manually clocked. The panel's own subscription and rendering must show the
 * unlock; the inspector must show the stored password bytes. */

import { ChildProcess, spawn } from "node:child_process";
import net from "node:net";
import path from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { KeyAction, LockApi } from "../src/api.js";
import { lcdText } from "../src/lcd.js";
import { Panel } from "../src/panel.js";

const REPO_ROOT = path.resolve(__dirname, "..", "..");

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const srv = net.createServer();
    srv.on("error", reject);
    srv.listen(0, "127.0.0.1", () => {
      const port = (srv.address() as net.AddressInfo).port;
      srv.close(() => resolve(port));
    });
  });
}

async function waitFor(check: () => boolean | Promise<boolean>, timeoutMs: number, what: string) {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (await check()) return;
    await new Promise((r) => setTimeout(r, 50));
  }
  throw new Error(`timed out waiting for ${what}`);
}

class TrackedApi extends LockApi {
  lastKey: Promise<void> = Promise.resolve();

  override sendKey(key: string, action: KeyAction): Promise<void> {
    const p = super.sendKey(key, action);
    this.lastKey = p.catch(() => undefined);
    return p;
  }
}

let proc: ChildProcess | null = null;
let api: TrackedApi;
let baseUrl: string;

beforeAll(async () => {
  const port = await freePort();
  baseUrl = `http://127.0.0.1:${port}`;
  proc = spawn(
    "python3",
    ["-m", "locksim.cli", "serve", "--manual-clock", "--bind", `127.0.0.1:${port}`],
    { cwd: REPO_ROOT, stdio: ["ignore", "pipe", "pipe"] },
  );
  api = new TrackedApi(baseUrl);
  await waitFor(async () => {
    try {
      await api.getState();
      return true;
    } catch {
      return false;
    }
  }, 30_000, "service startup");
});

afterAll(() => {
  proc?.kill();
});

async function tapThroughPanel(mount: HTMLElement, sym: string) {
  const button = mount.querySelector(`[data-key="${sym}"]`)!;
  button.dispatchEvent(new window.Event("pointerdown", { bubbles: true }));
  await api.lastKey;              // press POST delivered
  await api.advanceClock(40);     // held long enough to debounce
  button.dispatchEvent(new window.Event("pointerup", { bubbles: true }));
  await api.lastKey;
  await api.advanceClock(80);     // released and settled
}

describe("panel against the live service", () => {
  it("unlocks with the factory password and shows it in the inspector", async () => {
    document.body.innerHTML = '<main id="app"></main>';
    const mount = document.getElementById("app")!;
    const panel = new Panel(document, mount, api, { reconnectDelayMs: 0 });
    await panel.connect();
    await waitFor(
      () => lcdText(mount)[0].startsWith("Enter Password:"),
      10_000,
      "boot prompt",
    );

    for (const sym of "0000000000") {
      await tapThroughPanel(mount, sym);
    }
    await waitFor(
      () => lcdText(mount)[1].startsWith("**********"),
      10_000,
      "ten masked symbols",
    );
    // masking: the panel never has the digits, only stars
    expect(lcdText(mount)[1]).toBe("**********          ");

    await tapThroughPanel(mount, "D");
    await api.advanceClock(200);
    await waitFor(
      () => lcdText(mount)[0] === "verify successfully ",
      10_000,
      "success message",
    );
    const lock = mount.querySelector(".indicator.lock") as HTMLElement;
    expect(lock.dataset.state).toBe("open");

    // the hex inspector shows the stored password bytes (ASCII '0' = 0x30)
    await panel.refreshEeprom();
    const cells = mount.querySelectorAll(".eeprom-cell");
    expect(cells).toHaveLength(128);
    for (let i = 0; i < 10; i++) {
      expect(cells[i].textContent).toBe("30");
      expect(cells[i].classList.contains("password-region")).toBe(true);
    }

    panel.disconnect();
  });

  it("recovers state over the event channel after a reset", async () => {
    document.body.innerHTML = '<main id="app"></main>';
    const mount = document.getElementById("app")!;
    const panel = new Panel(document, mount, api, { reconnectDelayMs: 0 });
    await panel.connect();

    await fetch(`${baseUrl}/api/reset`, { method: "POST" });
    await api.advanceClock(50);
    await waitFor(
      () => lcdText(mount)[0].startsWith("Enter Password:") && lcdText(mount)[1].trim() === "",
      10_000,
      "prompt restored after reset",
    );
    panel.disconnect();
  });
});
