import { describe, expect, it } from "vitest";

import { clauseLine, highlightNile } from "../src/highlight";
import { GOLDEN_NILE, OVER_DEMAND_NILE } from "./fake";

describe("highlightNile", () => {
  it("wraps keywords and quoted strings", () => {
    const html = highlightNile("  from endpoint('iperf client')");
    expect(html).toContain('<span class="kw">from</span>');
    expect(html).toContain('<span class="kw">endpoint</span>');
    expect(html).toContain("<span class=\"str\">'iperf client'</span>");
  });

  it("leaves plain identifiers unwrapped", () => {
    const html = highlightNile("define intent testIntent:");
    expect(html).toContain('<span class="kw">define</span>');
    expect(html).not.toContain('<span class="kw">testIntent</span>');
  });

  it("escapes markup in the source text", () => {
    const html = highlightNile("add middlebox('<script>')");
    expect(html).not.toContain("<script>");
    expect(html).toContain("&lt;script&gt;");
  });

  it("numbers lines starting at 1", () => {
    const html = highlightNile(GOLDEN_NILE);
    expect(html).toContain('data-line="1"');
    expect(html).toContain('data-line="5"');
    expect(html.split("\n")).toHaveLength(5);
  });

  it("round-trips text through textContent", () => {
    const pre = document.createElement("pre");
    pre.innerHTML = highlightNile(GOLDEN_NILE);
    expect(pre.textContent).toBe(GOLDEN_NILE);
  });
});

describe("clauseLine", () => {
  it("maps clause references to program lines", () => {
    expect(clauseLine(OVER_DEMAND_NILE, "qos[1]")).toBe(5);
    expect(clauseLine(OVER_DEMAND_NILE, "locations[0]")).toBe(2);
    expect(clauseLine(OVER_DEMAND_NILE, "middleboxes[2]")).toBe(4);
  });

  it("returns 0 for unknown or absent clauses", () => {
    expect(clauseLine(GOLDEN_NILE, "qos[0]")).toBe(0);
    expect(clauseLine(GOLDEN_NILE, "bogus[9]")).toBe(0);
  });
});
