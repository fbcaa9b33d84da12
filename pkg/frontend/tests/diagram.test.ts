import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { renderDiagram, witnessToRefs } from "../src/diagram.js";
import type { ArchitectureDoc } from "../src/types.js";

const FIXTURES = join(__dirname, "..", "..", "fixtures");

function load(name: string): ArchitectureDoc {
  return JSON.parse(readFileSync(join(FIXTURES, name), "utf8"));
}

describe("renderDiagram", () => {
  const eshop = load("eshop.arch");
  const converted = load("eshop-cs.arch");

  it("renders a box per component and a square per port", () => {
    const { svg } = renderDiagram(eshop);
    for (const c of ["Product", "Customer", "Order"]) {
      expect(svg).toContain(`data-ref="${c}"`);
    }
    expect(svg).toContain('data-ref="Product#OpenOrder"');
    expect((svg.match(/class="port /g) ?? []).length).toBe(15);
  });

  it("renders nested components inside their parent configuration", () => {
    const { svg, refs } = renderDiagram(converted);
    expect(refs).toContain("Server/Order");
    expect(svg).toContain('data-ref="Server/Order#Cancel"');
    expect(svg).toContain('class="configuration"');
  });

  it("draws connector links with labels", () => {
    const { svg } = renderDiagram(eshop);
    expect(svg).toContain('data-ref="OpenOrder"');
    expect(svg).toContain(">Authenticate</text>");
  });

  it("hides uses markers by default and shows them on request", () => {
    expect(renderDiagram(eshop).svg).not.toContain("uses-badge");
    const shown = renderDiagram(eshop, { showUses: true }).svg;
    expect(shown).toContain("uses-badge");
    expect(shown).toContain(">U</text>");
  });

  it("highlights violating elements", () => {
    const { svg } = renderDiagram(eshop, {
      highlight: new Set(["Order", "Order#Cancel"]),
    });
    expect(svg).toMatch(/data-ref="Order" class="component kind-plain violation"/);
    expect(svg).toMatch(/data-ref="Order#Cancel" class="port provided violation"/);
  });

  it("every highlightable witness ref exists in the diagram", () => {
    const { refs } = renderDiagram(eshop);
    const witness = ["C:Order", "P:Product#OpenOrder", "K:Authenticate",
                     "R:OpenOrder.prov", "e:uses:a:b"];
    const mapped = witnessToRefs({ code: "x", message: "", witness });
    expect(mapped).toEqual(["Order", "Product#OpenOrder", "Authenticate"]);
    for (const ref of mapped) expect(refs).toContain(ref);
  });

  it("renders delegation bindings in the converted architecture", () => {
    const { svg } = renderDiagram(converted);
    expect(svg).toContain('class="binding"');
  });
});
