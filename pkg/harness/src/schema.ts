/**
 * Zod mirror of designlint snapshot schema v1 (docs/snapshot.schema.json).
 * Every capture is validated against this before it is written to disk.
 */

import { z } from "zod";

const rgba = z
  .array(z.number().min(0).max(1))
  .length(4);

const bbox = z.object({
  x: z.number(),
  y: z.number(),
  width: z.number().min(0),
  height: z.number().min(0),
});

const styles = z
  .object({
    color: rgba,
    "background-color": rgba,
    "font-size": z.string(),
    "font-weight": z.string(),
    "line-height": z.string(),
    "padding-top": z.string(),
    "padding-right": z.string(),
    "padding-bottom": z.string(),
    "padding-left": z.string(),
    "margin-top": z.string(),
    "margin-right": z.string(),
    "margin-bottom": z.string(),
    "margin-left": z.string(),
    display: z.string(),
    position: z.string(),
  })
  .catchall(z.union([z.string(), rgba]));

const node = z.object({
  id: z.number().int().min(0),
  parent_id: z.number().int().min(0).nullable(),
  tag: z.string().regex(/^[a-z][a-z0-9-]*$/),
  xpath: z.string().regex(/^(\/[a-z][a-z0-9-]*\[[0-9]+\])+$/),
  attributes: z.record(z.string(), z.string()),
  text: z.string(),
  bbox,
  styles,
});

export const snapshotSchema = z.object({
  schema_version: z.literal(1),
  source_ref: z.string(),
  viewport: z.object({
    width: z.number().int().min(1),
    height: z.number().int().min(1),
  }),
  nodes: z.array(node),
});

export type ValidatedSnapshot = z.infer<typeof snapshotSchema>;

/** Structural rules beyond plain shape: single root, ordered ids, unique xpaths. */
export function checkIntegrity(snapshot: ValidatedSnapshot): string[] {
  const problems: string[] = [];
  const seenIds = new Set<number>();
  const seenXpaths = new Set<string>();
  let roots = 0;
  let lastId = -1;
  for (const node of snapshot.nodes) {
    if (node.id <= lastId) problems.push(`node ids out of order at id ${node.id}`);
    lastId = node.id;
    if (node.parent_id === null) roots += 1;
    else if (!seenIds.has(node.parent_id)) {
      problems.push(`node ${node.id} references parent ${node.parent_id} which does not precede it`);
    }
    if (seenXpaths.has(node.xpath)) problems.push(`duplicate xpath ${node.xpath}`);
    seenIds.add(node.id);
    seenXpaths.add(node.xpath);
  }
  if (roots !== 1) problems.push(`expected exactly one root node, found ${roots}`);
  return problems;
}
