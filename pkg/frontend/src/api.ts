/** HTTP client for the lock simulation service, plus a server-sent-events
 * reader built on fetch streaming so it runs in browsers and in node tests
 * alike. The panel talks to the service through this module only. */

export interface Snapshot {
  lcd: [string, string];
  lock: "open" | "closed";
  buzzer: "on" | "off";
  mode: string;
  t_ms: number;
  sleeping: boolean;
  attempts: number;
}

export interface PanelEvent {
  type: "lcd_changed" | "lock" | "buzzer" | "state_changed";
  snapshot: Snapshot;
}

export type KeyAction = "press" | "release" | "tap";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function expectStatus(resp: Response, ...accepted: number[]): Promise<Response> {
  if (!accepted.includes(resp.status)) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      if (body && typeof body.error === "string") detail = body.error;
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(resp.status, detail);
  }
  return resp;
}

export class LockApi {
  constructor(public baseUrl: string) {}

  async getState(): Promise<Snapshot> {
    const resp = await expectStatus(await fetch(`${this.baseUrl}/api/state`), 200);
    return (await resp.json()) as Snapshot;
  }

  async sendKey(key: string, action: KeyAction): Promise<void> {
    await expectStatus(
      await fetch(`${this.baseUrl}/api/key`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ key, action }),
      }),
      204,
    );
  }

  async getEeprom(): Promise<string> {
    const resp = await expectStatus(await fetch(`${this.baseUrl}/api/eeprom`), 200);
    return (await resp.text()).trim();
  }

  async putEeprom(hex: string): Promise<void> {
    await expectStatus(
      await fetch(`${this.baseUrl}/api/eeprom`, { method: "PUT", body: hex }),
      204,
    );
  }

  async reset(): Promise<void> {
    await expectStatus(await fetch(`${this.baseUrl}/api/reset`, { method: "POST" }), 204);
  }

  async advanceClock(ms: number): Promise<void> {
    await expectStatus(
      await fetch(`${this.baseUrl}/api/clock`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ advance_ms: ms }),
      }),
      200,
    );
  }

  /** Subscribe to the event channel. Returns a function that stops the
   * subscription. onDown fires when the stream drops (reconnect handling
   * is the caller's job). */
  subscribe(onEvent: (ev: PanelEvent) => void, onDown?: () => void): () => void {
    const controller = new AbortController();
    (async () => {
      try {
        const resp = await fetch(`${this.baseUrl}/api/events`, {
          signal: controller.signal,
        });
        if (!resp.ok || !resp.body) throw new ApiError(resp.status, "event stream refused");
        const reader = resp.body.getReader();
        const decoder = new TextDecoder();
        let buffer = "";
        for (;;) {
          const { done, value } = await reader.read();
          if (done) break;
          buffer += decoder.decode(value, { stream: true });
          let sep;
          while ((sep = buffer.indexOf("\n\n")) >= 0) {
            const message = buffer.slice(0, sep);
            buffer = buffer.slice(sep + 2);
            for (const line of message.split("\n")) {
              if (line.startsWith("data:")) {
                onEvent(JSON.parse(line.slice(5)) as PanelEvent);
              }
            }
          }
        }
        if (!controller.signal.aborted && onDown) onDown();
      } catch {
        if (!controller.signal.aborted && onDown) onDown();
      }
    })();
    return () => controller.abort();
  }
}
