/** Architecture diagram renderer.
 *
 * Pure function from a wire document to an SVG string: nested containment
 * boxes for components and their configurations, ports on box borders
 * (provided left, required right), connector links, optional "U" markers for
 * uses dependencies, and violation highlighting via element refs.  Layout is
 * automatic; no coordinates are persisted.
 */

import type { ArchitectureDoc, ComponentDoc, ViolationDoc } from "./types.js";

export interface DiagramOptions {
  showUses?: boolean;
  highlight?: ReadonlySet<string>;
}

export interface Diagram {
  svg: string;
  /** Every element ref that the diagram rendered, for report integrity. */
  refs: string[];
}

const PORT = 10;
const ROW = 22;
const HEADER = 26;
const PAD = 16;
const MIN_WIDTH = 170;

interface Box {
  path: string;
  comp: ComponentDoc;
  x: number;
  y: number;
  w: number;
  h: number;
  children: Box[];
}

function measure(comp: ComponentDoc, path: string): Box {
  const left = comp.ports.filter((p) => p.direction === "provided").length;
  const right = comp.ports.filter((p) => p.direction === "required").length;
  const portRows = Math.max(left, right);
  const children = (comp.children ?? []).map((c) => measure(c, `${path}/${c.name}`));
  let w = MIN_WIDTH;
  let h = HEADER + Math.max(portRows * ROW, 0) + PAD;
  if (children.length) {
    let cy = h;
    for (const child of children) {
      child.x = PAD;
      child.y = cy;
      cy += child.h + PAD;
      w = Math.max(w, child.w + 2 * PAD);
    }
    h = cy;
  }
  return { path, comp, x: 0, y: 0, w, h, children };
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderDiagram(doc: ArchitectureDoc, opts: DiagramOptions = {}): Diagram {
  const highlight = opts.highlight ?? new Set<string>();
  const refs: string[] = [];
  const portPos = new Map<string, { x: number; y: number }>();
  const parts: string[] = [];

  const roots = doc.components.map((c) => measure(c, c.name));
  let y = PAD;
  let width = 0;
  for (const r of roots) {
    r.x = PAD;
    r.y = y;
    y += r.h + PAD;
    width = Math.max(width, r.w + 2 * PAD);
  }

  const cls = (ref: string, base: string) =>
    highlight.has(ref) ? `${base} violation` : base;

  function emitBox(box: Box, ox: number, oy: number): void {
    const x = ox + box.x;
    const yy = oy + box.y;
    const ref = box.path;
    refs.push(ref);
    parts.push(
      `<rect data-ref="${esc(ref)}" class="${cls(ref, `component kind-${box.comp.kind}`)}"` +
        ` x="${x}" y="${yy}" width="${box.w}" height="${box.h}" rx="4"/>`,
      `<text class="label" x="${x + 8}" y="${yy + 17}">${esc(box.comp.name)}</text>`,
    );
    if (box.comp.children !== undefined) {
      // the component's configuration: an inner dashed region
      parts.push(
        `<rect class="configuration" x="${x + 4}" y="${yy + HEADER - 4}"` +
          ` width="${box.w - 8}" height="${box.h - HEADER}" rx="3"/>`,
      );
    }
    let li = 0;
    let ri = 0;
    for (const p of box.comp.ports) {
      const pref = `${box.path}#${p.name}`;
      refs.push(pref);
      const provided = p.direction === "provided";
      const px = provided ? x - PORT / 2 : x + box.w - PORT / 2;
      const py = yy + HEADER + (provided ? li++ : ri++) * ROW;
      portPos.set(pref, { x: px + PORT / 2, y: py + PORT / 2 });
      parts.push(
        `<rect data-ref="${esc(pref)}" class="${cls(pref, `port ${p.direction}`)}"` +
          ` x="${px}" y="${py}" width="${PORT}" height="${PORT}"/>`,
        `<text class="port-label" x="${provided ? px + PORT + 3 : px - 3}"` +
          ` y="${py + PORT - 1}"${provided ? "" : ' text-anchor="end"'}>${esc(p.name)}</text>`,
      );
    }
    for (const child of box.children) emitBox(child, x, yy);
  }
  for (const r of roots) emitBox(r, 0, 0);

  // connector links: orthogonal path between the attached ports
  const byConn = new Map<string, string[]>();
  for (const { port, role } of doc.attachments) {
    const conn = role.split(".", 1)[0]!;
    if (!byConn.has(conn)) byConn.set(conn, []);
    byConn.get(conn)!.push(port);
  }
  for (const c of doc.connectors) {
    refs.push(c.name);
    const attached = (byConn.get(c.name) ?? []).filter((p) => portPos.has(p));
    for (let i = 0; i + 1 < attached.length; i++) {
      const a = portPos.get(attached[i]!)!;
      const b = portPos.get(attached[i + 1]!)!;
      const midX = (a.x + b.x) / 2;
      parts.push(
        `<path data-ref="${esc(c.name)}" class="${cls(c.name, "connector")}"` +
          ` d="M ${a.x} ${a.y} L ${midX} ${a.y} L ${midX} ${b.y} L ${b.x} ${b.y}"/>`,
      );
      if (i === 0)
        parts.push(
          `<text class="connector-label" x="${midX + 4}" y="${(a.y + b.y) / 2 - 4}">` +
            `${esc(c.name)}</text>`,
        );
    }
  }

  // bindings: dashed delegation lines
  for (const { outer, inner } of doc.bindings) {
    const a = portPos.get(outer);
    const b = portPos.get(inner);
    if (!a || !b) continue;
    parts.push(
      `<line class="binding" x1="${a.x}" y1="${a.y}" x2="${b.x}" y2="${b.y}"/>`,
    );
  }

  // uses dependencies: "U" markers, hidden unless toggled on
  if (opts.showUses) {
    for (const { from, to } of doc.uses) {
      const a = portPos.get(from);
      const b = portPos.get(to);
      if (!a || !b) continue;
      const mx = (a.x + b.x) / 2;
      const my = (a.y + b.y) / 2;
      parts.push(
        `<line class="uses" x1="${a.x}" y1="${a.y}" x2="${b.x}" y2="${b.y}"/>`,
        `<rect class="uses-badge" x="${mx - 7}" y="${my - 8}" width="14" height="14" rx="2"/>`,
        `<text class="uses-badge-label" x="${mx}" y="${my + 3}" text-anchor="middle">U</text>`,
      );
    }
  }

  const height = y + PAD;
  const svg =
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${Math.max(width, MIN_WIDTH + 2 * PAD)} ${height}">` +
    parts.join("") +
    `</svg>`;
  return { svg, refs };
}

/** Map a violation's graph-level witness ids to diagram element refs. */
export function witnessToRefs(v: ViolationDoc): string[] {
  const out: string[] = [];
  for (const id of v.witness) {
    const sep = id.indexOf(":");
    if (sep < 0) continue;
    const kind = id.slice(0, sep);
    const rest = id.slice(sep + 1);
    if (kind === "C" || kind === "G" || kind === "P" || kind === "K") out.push(rest);
  }
  return out;
}
