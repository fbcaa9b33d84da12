/** Canonical JSON serializer.
 *
 * Byte-compatible with the service's on-disk format: keys sorted, two-space
 * indentation, ASCII-only string escapes, and a trailing newline.  Exported
 * documents therefore compare byte-for-byte with files the CLI writes.
 */

function escapeString(s: string): string {
  let out = '"';
  for (let i = 0; i < s.length; i++) {
    const c = s.charCodeAt(i);
    const ch = s[i]!;
    if (ch === '"') out += '\\"';
    else if (ch === "\\") out += "\\\\";
    else if (ch === "\n") out += "\\n";
    else if (ch === "\r") out += "\\r";
    else if (ch === "\t") out += "\\t";
    else if (ch === "\b") out += "\\b";
    else if (ch === "\f") out += "\\f";
    else if (c < 0x20 || c > 0x7e) out += "\\u" + c.toString(16).padStart(4, "0");
    else out += ch;
  }
  return out + '"';
}

function render(value: unknown, indent: number): string {
  const pad = " ".repeat(indent);
  const inner = " ".repeat(indent + 2);
  if (value === null) return "null";
  if (typeof value === "boolean") return value ? "true" : "false";
  if (typeof value === "number") {
    if (!Number.isFinite(value)) throw new Error("non-finite number in document");
    return Number.isInteger(value) ? String(value) : JSON.stringify(value);
  }
  if (typeof value === "string") return escapeString(value);
  if (Array.isArray(value)) {
    if (value.length === 0) return "[]";
    const items = value.map((v) => inner + render(v, indent + 2));
    return "[\n" + items.join(",\n") + "\n" + pad + "]";
  }
  if (typeof value === "object") {
    const keys = Object.keys(value as object).sort();
    if (keys.length === 0) return "{}";
    const items = keys.map(
      (k) =>
        inner +
        escapeString(k) +
        ": " +
        render((value as Record<string, unknown>)[k], indent + 2),
    );
    return "{\n" + items.join(",\n") + "\n" + pad + "}";
  }
  throw new Error(`cannot serialize value of type ${typeof value}`);
}

export function canonicalJson(value: unknown): string {
  return render(value, 0) + "\n";
}
