/**
 * VLEB bundle encoding/decoding.
 *
 * Layout (little-endian u32 integers):
 *   "VLEB" | version=1 | dim | count | meta_len | meta JSON (UTF-8) | float32 payload
 *
 * Total size is exactly 20 + meta_len + 4 * count * dim. Metadata keys:
 * "kind" (image | text | object | prototype), optional "labels" (count
 * strings), optional "extra" (free object). NaN/Inf are rejected both ways.
 */

import { promises as fs } from "node:fs";
import { dirname, join } from "node:path";
import { randomBytes } from "node:crypto";

export const MAGIC = "VLEB";
export const VERSION = 1;
export const KINDS = ["image", "text", "object", "prototype"] as const;
export type BundleKind = (typeof KINDS)[number];

export interface BundleMeta {
  kind: BundleKind;
  labels?: string[];
  extra?: Record<string, unknown>;
}

export class VlebFormatError extends Error {}
export class BadMagicError extends VlebFormatError {}
export class UnsupportedVersionError extends VlebFormatError {}
export class TruncatedFileError extends VlebFormatError {}
export class MetaParseError extends VlebFormatError {}
export class NonFiniteError extends VlebFormatError {}

const HEADER_SIZE = 20;
const META_KEYS = new Set(["kind", "labels", "extra"]);

function checkMeta(meta: BundleMeta, count: number): void {
  if (typeof meta !== "object" || meta === null || Array.isArray(meta)) {
    throw new MetaParseError("meta must be a JSON object");
  }
  for (const key of Object.keys(meta)) {
    if (!META_KEYS.has(key)) {
      throw new MetaParseError(`unknown meta key: ${key}`);
    }
  }
  if (!KINDS.includes(meta.kind)) {
    throw new MetaParseError(`meta.kind must be one of ${KINDS.join(", ")}, got ${meta.kind}`);
  }
  if (meta.labels !== undefined) {
    if (!Array.isArray(meta.labels) || !meta.labels.every((l) => typeof l === "string")) {
      throw new MetaParseError("meta.labels must be a list of strings");
    }
    if (meta.labels.length !== count) {
      throw new MetaParseError(`meta.labels has ${meta.labels.length} entries for ${count} rows`);
    }
  }
  if (meta.extra !== undefined && (typeof meta.extra !== "object" || meta.extra === null || Array.isArray(meta.extra))) {
    throw new MetaParseError("meta.extra must be an object");
  }
}

/** Canonical JSON bytes: sorted keys, no whitespace (matches the Python writer). */
function canonicalJson(value: unknown): string {
  if (value === null || typeof value !== "object") {
    return JSON.stringify(value);
  }
  if (Array.isArray(value)) {
    return `[${value.map(canonicalJson).join(",")}]`;
  }
  const entries = Object.entries(value as Record<string, unknown>)
    .filter(([, v]) => v !== undefined)
    .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
    .map(([k, v]) => `${JSON.stringify(k)}:${canonicalJson(v)}`);
  return `{${entries.join(",")}}`;
}

export function encodeBundle(rows: number[][], meta: BundleMeta, dim?: number): Buffer {
  const count = rows.length;
  const width = dim ?? (count > 0 ? rows[0].length : 0);
  for (const row of rows) {
    if (row.length !== width) {
      throw new VlebFormatError(`ragged rows: expected dim ${width}, got ${row.length}`);
    }
  }
  checkMeta(meta, count);
  const payload = new Float32Array(count * width);
  let i = 0;
  for (const row of rows) {
    for (const v of row) {
      if (!Number.isFinite(v)) {
        throw new NonFiniteError("embeddings contain NaN or Inf");
      }
      payload[i] = v;
      if (!Number.isFinite(payload[i])) {
        throw new NonFiniteError("embedding value overflows the 32-bit float range");
      }
      i += 1;
    }
  }
  const metaBytes = Buffer.from(canonicalJson(meta), "utf-8");
  const header = Buffer.alloc(HEADER_SIZE);
  header.write(MAGIC, 0, "ascii");
  header.writeUInt32LE(VERSION, 4);
  header.writeUInt32LE(width, 8);
  header.writeUInt32LE(count, 12);
  header.writeUInt32LE(metaBytes.length, 16);
  const body = Buffer.from(payload.buffer, payload.byteOffset, payload.byteLength);
  return Buffer.concat([header, metaBytes, body]);
}

export interface DecodedBundle {
  rows: Float32Array[];
  dim: number;
  count: number;
  meta: BundleMeta;
}

export function decodeBundle(data: Buffer): DecodedBundle {
  if (data.length >= 4 && data.toString("ascii", 0, 4) !== MAGIC) {
    throw new BadMagicError(`bad magic ${data.toString("ascii", 0, 4)}`);
  }
  if (data.length < HEADER_SIZE) {
    throw new TruncatedFileError(`file has ${data.length} bytes, header needs ${HEADER_SIZE}`);
  }
  const version = data.readUInt32LE(4);
  if (version !== VERSION) {
    throw new UnsupportedVersionError(`version ${version} not supported`);
  }
  const dim = data.readUInt32LE(8);
  const count = data.readUInt32LE(12);
  const metaLen = data.readUInt32LE(16);
  const expected = HEADER_SIZE + metaLen + 4 * count * dim;
  if (data.length < expected) {
    throw new TruncatedFileError(`file has ${data.length} bytes, layout needs ${expected}`);
  }
  if (data.length > expected) {
    throw new VlebFormatError(`${data.length - expected} trailing bytes after payload`);
  }
  let meta: BundleMeta;
  try {
    meta = JSON.parse(data.toString("utf-8", HEADER_SIZE, HEADER_SIZE + metaLen));
  } catch (err) {
    throw new MetaParseError(`metadata is not valid UTF-8 JSON: ${err}`);
  }
  checkMeta(meta, count);
  const rows: Float32Array[] = [];
  for (let r = 0; r < count; r += 1) {
    const row = new Float32Array(dim);
    for (let c = 0; c < dim; c += 1) {
      row[c] = data.readFloatLE(HEADER_SIZE + metaLen + 4 * (r * dim + c));
      if (!Number.isFinite(row[c])) {
        throw new NonFiniteError("payload contains NaN or Inf");
      }
    }
    rows.push(row);
  }
  return { rows, dim, count, meta };
}

/** Atomic write: temp file in the target directory, then rename. */
export async function writeBundle(
  rows: number[][],
  meta: BundleMeta,
  path: string,
  dim?: number,
): Promise<void> {
  const data = encodeBundle(rows, meta, dim);
  const tmp = join(dirname(path) || ".", `.${randomBytes(6).toString("hex")}.vleb.tmp`);
  await fs.writeFile(tmp, data);
  try {
    await fs.rename(tmp, path);
  } catch (err) {
    await fs.unlink(tmp).catch(() => undefined);
    throw err;
  }
}

export async function readBundle(path: string): Promise<DecodedBundle> {
  return decodeBundle(await fs.readFile(path));
}
