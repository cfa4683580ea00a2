/**
 * Browser capture: render a page at each requested viewport in headless
 * Chromium and write one schema-v1 snapshot file per viewport.
 *
 * Settle policy: navigation waits for network idle, then a fixed 500ms
 * quiet period before the DOM walk. One browser context per viewport,
 * captured sequentially.
 */

import { mkdir, writeFile } from "node:fs/promises";
import * as path from "node:path";
import { pathToFileURL } from "node:url";

import { chromium } from "playwright";

import { collectSnapshot } from "./snapshot-builder.js";
import { checkIntegrity, snapshotSchema } from "./schema.js";

export class NavigationError extends Error {}
export class CaptureTimeoutError extends Error {}

export interface Viewport {
  width: number;
  height: number;
}

export interface CaptureJob {
  /** local file path or URL */
  target: string;
  viewports: Viewport[];
  outDir: string;
  timeoutMs?: number;
  quietMs?: number;
}

function targetUrl(target: string): { url: string; stem: string } {
  if (/^https?:\/\//i.test(target)) {
    const last = new URL(target).pathname.split("/").filter(Boolean).pop() ?? "page";
    return { url: target, stem: last.replace(/\.[a-z0-9]+$/i, "") || "page" };
  }
  const resolved = path.resolve(target);
  return {
    url: pathToFileURL(resolved).href,
    stem: path.basename(resolved).replace(/\.[a-z0-9]+$/i, ""),
  };
}

export function snapshotFileName(stem: string, viewport: Viewport): string {
  return `${stem}.${viewport.width}x${viewport.height}.snapshot.json`;
}

export async function capture(job: CaptureJob): Promise<string[]> {
  if (job.viewports.length < 1) {
    throw new Error("capture needs at least one viewport");
  }
  const { url, stem } = targetUrl(job.target);
  await mkdir(job.outDir, { recursive: true });
  const timeout = job.timeoutMs ?? 30_000;
  const quiet = job.quietMs ?? 500;

  const browser = await chromium.launch({ headless: true });
  const written: string[] = [];
  try {
    for (const viewport of job.viewports) {
      const context = await browser.newContext({ viewport });
      try {
        const page = await context.newPage();
        try {
          await page.goto(url, { waitUntil: "networkidle", timeout });
        } catch (error) {
          const message = error instanceof Error ? error.message : String(error);
          if (/timeout/i.test(message)) {
            throw new CaptureTimeoutError(`render exceeded ${timeout}ms: ${url}`);
          }
          throw new NavigationError(`failed to load ${url}: ${message}`);
        }
        await page.waitForTimeout(quiet);

        const raw = await page.evaluate(collectSnapshot, {
          viewportWidth: viewport.width,
          viewportHeight: viewport.height,
          sourceRef: path.basename(job.target),
        });
        const snapshot = snapshotSchema.parse(raw);
        const problems = checkIntegrity(snapshot);
        if (problems.length > 0) {
          throw new Error(`snapshot integrity: ${problems.join("; ")}`);
        }
        const file = path.join(job.outDir, snapshotFileName(stem, viewport));
        await writeFile(file, JSON.stringify(snapshot, null, 2) + "\n", "utf-8");
        written.push(file);
      } finally {
        await context.close();
      }
    }
  } finally {
    await browser.close();
  }
  return written;
}
