/** The 20x2 LCD glass, one cell per character so the panel looks like the
 * real module. The panel never composes text itself: cells mirror the
 * snapshot rows (digits already arrive masked as '*'). */

export function renderLcd(doc: Document, rows: [string, string]): HTMLElement {
  const glass = doc.createElement("div");
  glass.className = "lcd";
  for (const row of rows) {
    const line = doc.createElement("div");
    line.className = "lcd-row";
    const padded = row.padEnd(20).slice(0, 20);
    for (const ch of padded) {
      const cell = doc.createElement("span");
      cell.className = "lcd-cell";
      cell.textContent = ch === " " ? " " : ch;
      line.appendChild(cell);
    }
    glass.appendChild(line);
  }
  return glass;
}

export function lcdText(root: ParentNode): [string, string] {
  const rows = Array.from(root.querySelectorAll(".lcd-row")).map((line) =>
    Array.from(line.querySelectorAll(".lcd-cell"))
      .map((cell) => (cell.textContent === " " ? " " : cell.textContent ?? " "))
      .join(""),
  );
  return [rows[0] ?? "", rows[1] ?? ""];
}
