/**
 * Regenerate examples/button_page.1280x800.snapshot.json from
 * examples/button_page.html using jsdom (no browser needed; geometry is
 * zero, colors and structure are real). The committed file is the
 * cross-language contract fixture checked by the Python test suite.
 */

import { readFileSync, writeFileSync } from "node:fs";
import * as path from "node:path";
import { fileURLToPath } from "node:url";

import { JSDOM } from "jsdom";

import { collectSnapshot } from "../src/snapshot-builder.js";
import { checkIntegrity, snapshotSchema } from "../src/schema.js";

const here = path.dirname(fileURLToPath(import.meta.url));
const examples = path.resolve(here, "..", "..", "examples");

const html = readFileSync(path.join(examples, "button_page.html"), "utf-8");
const dom = new JSDOM(html);

const snapshot = collectSnapshot({
  viewportWidth: 1280,
  viewportHeight: 800,
  sourceRef: "button_page.html",
  doc: dom.window.document as unknown as Document,
});

const validated = snapshotSchema.parse(snapshot);
const problems = checkIntegrity(validated);
if (problems.length > 0) {
  throw new Error(`integrity problems: ${problems.join("; ")}`);
}

const out = path.join(examples, "button_page.1280x800.snapshot.json");
writeFileSync(out, JSON.stringify(validated, null, 2) + "\n", "utf-8");
console.log(`wrote ${out} (${validated.nodes.length} nodes)`);
