import { describe, expect, it } from "vitest";

import { main } from "../src/cli.js";
import { snapshotFileName } from "../src/capture.js";

describe("cli argument handling", () => {
  it("rejects unknown commands with exit 2", async () => {
    expect(await main(["render"])).toBe(2);
  });

  it("requires --target and --out", async () => {
    expect(await main(["capture", "--out", "x"])).toBe(2);
    expect(await main(["capture", "--target", "x"])).toBe(2);
  });

  it("rejects malformed viewports", async () => {
    expect(
      await main(["capture", "--target", "x", "--out", "y", "--viewport", "huge"])
    ).toBe(2);
  });
});

describe("snapshot file naming", () => {
  it("uses stem.WxH.snapshot.json", () => {
    expect(snapshotFileName("button_page", { width: 1280, height: 800 })).toBe(
      "button_page.1280x800.snapshot.json"
    );
  });
});
