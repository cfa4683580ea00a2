/**
 * CLI: capture --target <path|url> --viewport WxH [--viewport WxH ...] --out <dir>
 *
 * Exit codes: 0 success, 1 capture failure (navigation/timeout), 2 usage.
 */

import { capture, CaptureTimeoutError, NavigationError, Viewport } from "./capture.js";

function parseViewport(value: string): Viewport {
  const match = value.toLowerCase().match(/^([0-9]+)x([0-9]+)$/);
  if (!match) {
    throw new Error(`bad viewport '${value}', expected WIDTHxHEIGHT like 1280x800`);
  }
  return { width: parseInt(match[1], 10), height: parseInt(match[2], 10) };
}

interface Args {
  target: string;
  viewports: Viewport[];
  out: string;
  timeoutMs?: number;
}

function parseArgs(argv: string[]): Args {
  if (argv[0] !== "capture") {
    throw new Error("usage: capture --target <path|url> --viewport WxH [--viewport WxH ...] --out <dir>");
  }
  let target: string | undefined;
  let out: string | undefined;
  let timeoutMs: number | undefined;
  const viewports: Viewport[] = [];
  for (let i = 1; i < argv.length; i++) {
    const flag = argv[i];
    const value = argv[i + 1];
    switch (flag) {
      case "--target":
        target = value;
        i++;
        break;
      case "--viewport":
        viewports.push(parseViewport(value));
        i++;
        break;
      case "--out":
        out = value;
        i++;
        break;
      case "--timeout":
        timeoutMs = parseInt(value, 10);
        i++;
        break;
      default:
        throw new Error(`unknown flag ${flag}`);
    }
  }
  if (!target) throw new Error("--target is required");
  if (!out) throw new Error("--out is required");
  if (viewports.length === 0) viewports.push({ width: 1280, height: 800 });
  return { target, viewports, out, timeoutMs };
}

export async function main(argv: string[]): Promise<number> {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (error) {
    console.error(`error: ${error instanceof Error ? error.message : error}`);
    return 2;
  }
  try {
    const files = await capture({
      target: args.target,
      viewports: args.viewports,
      outDir: args.out,
      timeoutMs: args.timeoutMs,
    });
    for (const file of files) console.log(file);
    return 0;
  } catch (error) {
    if (error instanceof NavigationError || error instanceof CaptureTimeoutError) {
      console.error(`capture failed: ${error.message}`);
      return 1;
    }
    console.error(`error: ${error instanceof Error ? error.message : error}`);
    return 1;
  }
}

const invokedDirectly = process.argv[1]?.endsWith("cli.js");
if (invokedDirectly) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
