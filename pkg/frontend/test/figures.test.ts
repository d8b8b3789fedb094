import { mkdtempSync, readFileSync, writeFileSync, copyFileSync, readdirSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { describe, expect, it } from "vitest";

import { KINDS, render } from "../src/figures.js";
import { SchemaError, loadTable, numeric, parseCsv } from "../src/csv.js";
import { main } from "../src/cli.js";

const FIXTURES = join(__dirname, "..", "fixtures");

function tempCopyOfFixtures(): string {
  const dir = mkdtempSync(join(tmpdir(), "plots-"));
  for (const name of readdirSync(FIXTURES)) {
    copyFileSync(join(FIXTURES, name), join(dir, name));
  }
  return dir;
}

describe("figure rendering", () => {
  for (const kind of KINDS) {
    it(`renders the ${kind} figure from a compare run`, () => {
      const svg = render(kind, FIXTURES);
      expect(svg.startsWith("<svg")).toBe(true);
      expect(svg).toContain("</svg>");
      const mark = kind === "bars" || kind === "spikes" ? "<rect" : "<polyline";
      expect(svg).toContain(mark);
    });
  }

  it("is deterministic for identical inputs", () => {
    for (const kind of KINDS) {
      expect(render(kind, FIXTURES)).toEqual(render(kind, FIXTURES));
    }
  });

  it("trace figure has one panel per motor", () => {
    const svg = render("trace", FIXTURES);
    for (const m of [1, 2, 3, 4]) {
      expect(svg).toContain(`motor ${m}`);
    }
  });

  it("kkt figure uses a log axis", () => {
    const svg = render("kkt", FIXTURES);
    expect(svg).toMatch(/1e-?\d+/);
  });
});

describe("schema validation", () => {
  it("names the missing column on a truncated csv", () => {
    const dir = tempCopyOfFixtures();
    const path = join(dir, "estimates.csv");
    const lines = readFileSync(path, "utf-8").split("\n");
    // Drop the last column from the header and every row.
    const truncated = lines
      .filter((ln) => ln.trim().length > 0)
      .map((ln) => ln.split(",").slice(0, -1).join(","))
      .join("\n");
    writeFileSync(path, truncated + "\n");
    expect(() => render("trace", dir)).toThrowError(/missing column 'converged'/);
  });

  it("rejects an unexpected column by name", () => {
    const dir = tempCopyOfFixtures();
    const path = join(dir, "truth.csv");
    const lines = readFileSync(path, "utf-8")
      .split("\n")
      .filter((ln) => ln.trim().length > 0)
      .map((ln, i) => (i === 0 ? ln + ",bogus" : ln + ",0"));
    writeFileSync(path, lines.join("\n") + "\n");
    expect(() => render("trace", dir)).toThrowError(/unexpected column 'bogus'/);
  });

  it("rejects ragged rows with the row number", () => {
    expect(() => parseCsv("a,b\n1,2\n3\n")).toThrowError(/row 3/);
  });

  it("rejects non-numeric cells with the column name", () => {
    const table = parseCsv("t,v\n0.0,oops\n");
    expect(() => numeric(table, "v")).toThrowError(/column 'v'/);
  });

  it("loadTable checks the frozen schema", () => {
    expect(() => loadTable(join(FIXTURES, "truth.csv"), "estimates")).toThrowError(SchemaError);
  });
});

describe("cli", () => {
  it("renders every kind to an svg file", () => {
    const out = mkdtempSync(join(tmpdir(), "plots-out-"));
    for (const kind of KINDS) {
      const file = join(out, `${kind}.svg`);
      expect(main([kind, "--in", FIXTURES, "--out", file])).toBe(0);
      expect(readFileSync(file, "utf-8")).toContain("</svg>");
    }
  });

  it("fails with usage on bad arguments", () => {
    expect(main([])).toBe(2);
    expect(main(["nope", "--in", FIXTURES, "--out", "/tmp/x.svg"])).toBe(2);
    expect(main(["trace", "--wat", FIXTURES])).toBe(2);
  });

  it("exits 2 with a named column on truncated input", () => {
    const dir = tempCopyOfFixtures();
    const path = join(dir, "kkt_trace.csv");
    const lines = readFileSync(path, "utf-8")
      .split("\n")
      .filter((ln) => ln.trim().length > 0)
      .map((ln) => ln.split(",").slice(0, -1).join(","));
    writeFileSync(path, lines.join("\n") + "\n");
    const out = mkdtempSync(join(tmpdir(), "plots-out-"));
    expect(main(["kkt", "--in", dir, "--out", join(out, "kkt.svg")])).toBe(2);
  });
});
