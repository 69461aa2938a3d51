/** The 4x4 keypad: rows 1-2-3-A / 4-5-6-B / 7-8-9-C / *-0-#-D, with the
 * control-key captions. Pointer down/up map to press/release so real hold
 * timing reaches the firmware's debounce; a pointer leaving a held button
 * releases it (no stuck keys). */

export const KEY_ROWS: string[][] = [
  ["1", "2", "3", "A"],
  ["4", "5", "6", "B"],
  ["7", "8", "9", "C"],
  ["*", "0", "#", "D"],
];

export const KEY_CAPTIONS: Record<string, string> = {
  A: "back space",
  B: "lock",
  C: "modify pass.",
  D: "enter",
};

export interface KeypadHandlers {
  onPress(sym: string): void;
  onRelease(sym: string): void;
}

export function renderKeypad(
  doc: Document,
  handlers: KeypadHandlers,
  held: Set<string>,
): HTMLElement {
  const grid = doc.createElement("div");
  grid.className = "keypad";
  for (const row of KEY_ROWS) {
    for (const sym of row) {
      const button = doc.createElement("button");
      button.className = "key";
      button.dataset.key = sym;
      const label = doc.createElement("span");
      label.className = "key-symbol";
      label.textContent = sym;
      button.appendChild(label);
      const caption = KEY_CAPTIONS[sym];
      if (caption) {
        const cap = doc.createElement("span");
        cap.className = "key-caption";
        cap.textContent = caption;
        button.appendChild(cap);
      }
      button.addEventListener("pointerdown", () => {
        if (held.has(sym)) return;
        held.add(sym);
        button.classList.add("held");
        handlers.onPress(sym);
      });
      const releaseIfHeld = () => {
        if (!held.has(sym)) return;
        held.delete(sym);
        button.classList.remove("held");
        handlers.onRelease(sym);
      };
      button.addEventListener("pointerup", releaseIfHeld);
      button.addEventListener("pointerleave", releaseIfHeld);
      button.addEventListener("pointercancel", releaseIfHeld);
      grid.appendChild(button);
    }
  }
  return grid;
}

/** Keyboard shortcuts: digits, * and # as themselves, Backspace -> A,
 * Enter -> D. Returns the mapped key symbol or null. */
export function shortcutFor(key: string): string | null {
  if (/^[0-9*#]$/.test(key)) return key;
  if (key === "Backspace") return "A";
  if (key === "Enter") return "D";
  return null;
}
