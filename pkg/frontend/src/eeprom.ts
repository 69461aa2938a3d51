/** EEPROM inspector: 128 bytes as an 8x16 hex grid with the password region
 * (0x00-0x09) highlighted, plus an image-upload box that PUTs a new image. */

export const PASSWORD_REGION_END = 10;

export interface EepromHandlers {
  onUpload(hex: string): Promise<void>;
}

export function renderEeprom(
  doc: Document,
  hex: string,
  handlers: EepromHandlers,
): HTMLElement {
  const panel = doc.createElement("div");
  panel.className = "eeprom";

  const grid = doc.createElement("div");
  grid.className = "eeprom-grid";
  const bytes = hex.match(/.{2}/g) ?? [];
  bytes.forEach((byte, index) => {
    const cell = doc.createElement("span");
    cell.className = "eeprom-cell";
    if (index < PASSWORD_REGION_END) cell.classList.add("password-region");
    cell.dataset.addr = index.toString();
    cell.textContent = byte.toUpperCase();
    grid.appendChild(cell);
  });
  panel.appendChild(grid);

  const form = doc.createElement("div");
  form.className = "eeprom-upload";
  const input = doc.createElement("textarea");
  input.className = "eeprom-input";
  input.placeholder = "256 hex chars (whitespace ok)";
  const button = doc.createElement("button");
  button.className = "eeprom-upload-button";
  button.textContent = "upload image";
  const error = doc.createElement("div");
  error.className = "eeprom-error";
  button.addEventListener("click", () => {
    error.textContent = "";
    handlers.onUpload(input.value).catch((err) => {
      error.textContent = String(err.message ?? err);
    });
  });
  form.appendChild(input);
  form.appendChild(button);
  form.appendChild(error);
  panel.appendChild(form);

  return panel;
}
