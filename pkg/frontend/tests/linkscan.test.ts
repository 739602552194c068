// Link-scan parity: the extension must find exactly the links the server's
// crawler discovery finds, for every shared fixture.
import { readFileSync, readdirSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";
import { scanTosLinks } from "../src/linkscan";
import { TOS_KEYWORDS } from "../src/keywords";

const FIXTURE_DIR = join(__dirname, "..", "..", "tests", "fixtures", "linkscan");

interface Expected {
  [file: string]: { base_url: string; links: string[] };
}

const expected: Expected = JSON.parse(
  readFileSync(join(FIXTURE_DIR, "expected_links.json"), "utf-8"),
);

describe("link scan parity with the server crawler", () => {
  it("covers all ten shared fixtures", () => {
    const htmlFiles = readdirSync(FIXTURE_DIR).filter((f) => f.endsWith(".html"));
    expect(htmlFiles.sort()).toEqual(Object.keys(expected).sort());
    expect(htmlFiles).toHaveLength(10);
  });

  for (const [name, { base_url, links }] of Object.entries(expected)) {
    it(`matches discover_tos_links on ${name}`, () => {
      const html = readFileSync(join(FIXTURE_DIR, name), "utf-8");
      const doc = new DOMParser().parseFromString(html, "text/html");
      expect(scanTosLinks(doc, base_url, TOS_KEYWORDS)).toEqual(links);
    });
  }
});
