/**
 * Pure snapshot builder.
 *
 * `collectSnapshot` is fully self-contained (no outer-scope references) so
 * Playwright can serialize it into the page with `page.evaluate`. Outside a
 * browser it accepts an injected document (jsdom or a test double), which is
 * how the unit tests drive it.
 *
 * Output follows designlint snapshot schema v1 (docs/snapshot_schema_v1.md):
 * one node per element in document order, absolute per-tag-indexed xpaths,
 * whitespace-collapsed direct text, bounding boxes, and the fixed style key
 * set with colors normalized to sRGB RGBA floats in [0, 1].
 */

export type Rgba = [number, number, number, number];

export interface SnapshotNode {
  id: number;
  parent_id: number | null;
  tag: string;
  xpath: string;
  attributes: Record<string, string>;
  text: string;
  bbox: { x: number; y: number; width: number; height: number };
  styles: Record<string, string | Rgba>;
}

export interface Snapshot {
  schema_version: 1;
  source_ref: string;
  viewport: { width: number; height: number };
  nodes: SnapshotNode[];
}

export interface CollectInput {
  viewportWidth: number;
  viewportHeight: number;
  sourceRef: string;
  /** Injected document for non-browser use; defaults to globalThis.document. */
  doc?: Document;
}

export function collectSnapshot(input: CollectInput): Snapshot {
  const doc: Document = input.doc ?? (globalThis as unknown as { document: Document }).document;
  const view = (doc.defaultView ?? (globalThis as unknown as { window: Window }).window) as Window &
    typeof globalThis;

  const COLOR_KEYS = ["color", "background-color"];
  const STRING_KEYS = [
    "font-size",
    "font-weight",
    "line-height",
    "padding-top",
    "padding-right",
    "padding-bottom",
    "padding-left",
    "margin-top",
    "margin-right",
    "margin-bottom",
    "margin-left",
    "display",
    "position",
  ];
  const FONT_KEYWORDS: Record<string, string> = {
    "xx-small": "9px",
    "x-small": "10px",
    small: "13px",
    medium: "16px",
    large: "18px",
    "x-large": "24px",
    "xx-large": "32px",
  };

  function clamp01(value: number): number {
    return Math.min(1, Math.max(0, value));
  }

  function parseColor(raw: string, isBackground: boolean): Rgba {
    const fallback: Rgba = isBackground ? [0, 0, 0, 0] : [0, 0, 0, 1];
    const value = (raw || "").trim().toLowerCase();
    if (!value) return fallback;
    if (value === "transparent") return [0, 0, 0, 0];
    const rgb = value.match(
      /^rgba?\(\s*([0-9.]+)\s*[, ]\s*([0-9.]+)\s*[, ]\s*([0-9.]+)(?:\s*[,/]\s*([0-9.]+%?))?\s*\)$/
    );
    if (rgb) {
      const alphaRaw = rgb[4];
      let alpha = 1;
      if (alphaRaw !== undefined) {
        alpha = alphaRaw.endsWith("%") ? parseFloat(alphaRaw) / 100 : parseFloat(alphaRaw);
      }
      return [
        clamp01(parseFloat(rgb[1]) / 255),
        clamp01(parseFloat(rgb[2]) / 255),
        clamp01(parseFloat(rgb[3]) / 255),
        clamp01(alpha),
      ];
    }
    const hex = value.match(/^#([0-9a-f]{3,8})$/);
    if (hex) {
      let digits = hex[1];
      if (digits.length === 3 || digits.length === 4) {
        digits = digits
          .split("")
          .map((d) => d + d)
          .join("");
      }
      if (digits.length === 6) digits += "ff";
      if (digits.length === 8) {
        return [
          parseInt(digits.slice(0, 2), 16) / 255,
          parseInt(digits.slice(2, 4), 16) / 255,
          parseInt(digits.slice(4, 6), 16) / 255,
          parseInt(digits.slice(6, 8), 16) / 255,
        ];
      }
    }
    return fallback;
  }

  function styleValue(key: string, raw: string): string {
    const value = (raw || "").trim();
    if (!value) {
      if (key === "display") return "block";
      if (key === "position") return "static";
      if (key === "font-size") return "16px";
      if (key === "font-weight") return "400";
      if (key === "line-height") return "normal";
      return "0px";
    }
    if (key === "font-size" && FONT_KEYWORDS[value]) return FONT_KEYWORDS[value];
    if (key === "font-weight") {
      if (value === "normal") return "400";
      if (value === "bold") return "700";
    }
    return value;
  }

  function collapse(text: string): string {
    return text.replace(/\s+/g, " ").trim();
  }

  const nodes: SnapshotNode[] = [];

  function walk(element: Element, parentId: number | null, xpath: string): void {
    const id = nodes.length;
    const computed = view.getComputedStyle(element);

    const attributes: Record<string, string> = {};
    for (let i = 0; i < element.attributes.length; i++) {
      const attr = element.attributes[i];
      attributes[attr.name] = attr.value;
    }

    let directText = "";
    for (let i = 0; i < element.childNodes.length; i++) {
      const child = element.childNodes[i];
      if (child.nodeType === 3) directText += child.textContent ?? "";
    }

    const rect = element.getBoundingClientRect();
    const styles: Record<string, string | Rgba> = {};
    for (const key of COLOR_KEYS) {
      styles[key] = parseColor(computed.getPropertyValue(key), key === "background-color");
    }
    for (const key of STRING_KEYS) {
      styles[key] = styleValue(key, computed.getPropertyValue(key));
    }

    nodes.push({
      id,
      parent_id: parentId,
      tag: element.tagName.toLowerCase(),
      xpath,
      attributes,
      text: collapse(directText),
      bbox: {
        x: rect.x ?? 0,
        y: rect.y ?? 0,
        width: Math.max(rect.width ?? 0, 0),
        height: Math.max(rect.height ?? 0, 0),
      },
      styles,
    });

    const counters: Record<string, number> = {};
    for (let i = 0; i < element.children.length; i++) {
      const child = element.children[i];
      const tag = child.tagName.toLowerCase();
      counters[tag] = (counters[tag] ?? 0) + 1;
      walk(child, id, `${xpath}/${tag}[${counters[tag]}]`);
    }
  }

  const root = doc.documentElement;
  if (!root) {
    throw new Error("document has no root element");
  }
  walk(root, null, "/html[1]");

  return {
    schema_version: 1,
    source_ref: input.sourceRef,
    viewport: { width: input.viewportWidth, height: input.viewportHeight },
    nodes,
  };
}
