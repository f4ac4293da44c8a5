/**
 * Embedding backends.
 *
 * Model ids of the form "hash:<dim>" select a deterministic, dependency-free
 * backend meant for pipeline and format testing; it hashes character
 * trigrams (text) or byte chunks (images) into a fixed-dimension vector and
 * carries no semantics. Any other id is loaded as a CLIP-style checkpoint
 * through transformers.js and runs real inference.
 */

import { promises as fs } from "node:fs";
import { createHash } from "node:crypto";

export class ModelUnavailableError extends Error {}
export class InputUnreadableError extends Error {}

export interface EmbeddingModel {
  id: string;
  dim: number | undefined;
  embedTexts(texts: string[]): Promise<number[][]>;
  embedImages(paths: string[]): Promise<number[][]>;
}

export function l2Normalize(vec: number[]): number[] {
  let sq = 0;
  for (const v of vec) sq += v * v;
  const norm = Math.sqrt(sq);
  if (norm <= 1e-12) {
    throw new Error("cannot normalize a zero vector");
  }
  return vec.map((v) => v / norm);
}

function hashToVector(chunks: string[], dim: number): number[] {
  const vec = new Array<number>(dim).fill(0);
  for (const chunk of chunks) {
    const digest = createHash("sha256").update(chunk).digest();
    const slot = digest.readUInt32LE(0) % dim;
    const sign = digest[4] & 1 ? 1 : -1;
    const weight = 1 + (digest[5] / 255);
    vec[slot] += sign * weight;
  }
  // deterministic tie-breaker so no input maps to the zero vector
  if (!vec.some((v) => v !== 0)) {
    vec[0] = 1;
  }
  return l2Normalize(vec);
}

class HashModel implements EmbeddingModel {
  constructor(public readonly dim: number) {}

  get id(): string {
    return `hash:${this.dim}`;
  }

  async embedTexts(texts: string[]): Promise<number[][]> {
    return texts.map((t) => {
      const padded = `##${t.toLowerCase()}##`;
      const grams: string[] = [];
      for (let i = 0; i + 3 <= padded.length; i += 1) {
        grams.push(padded.slice(i, i + 3));
      }
      return hashToVector(grams, this.dim);
    });
  }

  async embedImages(paths: string[]): Promise<number[][]> {
    const out: number[][] = [];
    for (const path of paths) {
      let bytes: Buffer;
      try {
        bytes = await fs.readFile(path);
      } catch (err) {
        throw new InputUnreadableError(`cannot read image ${path}: ${err}`);
      }
      const chunks: string[] = [];
      for (let i = 0; i < bytes.length; i += 64) {
        chunks.push(bytes.subarray(i, i + 64).toString("base64"));
      }
      out.push(hashToVector(chunks, this.dim));
    }
    return out;
  }
}

// Loaded lazily so environments without the optional transformers.js
// dependency still get everything except real-model inference.
const TRANSFORMERS_MODULE = "@huggingface/transformers";

class ClipModel implements EmbeddingModel {
  dim: number | undefined;

  private constructor(
    public readonly id: string,
    private readonly tf: any,
    private readonly tokenizer: any,
    private readonly textModel: any,
    private readonly processor: any,
    private readonly visionModel: any,
  ) {}

  static async load(modelId: string): Promise<ClipModel> {
    let tf: any;
    try {
      tf = await import(TRANSFORMERS_MODULE);
    } catch (err) {
      throw new ModelUnavailableError(
        `transformers.js is not installed (npm install @huggingface/transformers): ${err}`,
      );
    }
    try {
      const [tokenizer, textModel, processor, visionModel] = await Promise.all([
        tf.AutoTokenizer.from_pretrained(modelId),
        tf.CLIPTextModelWithProjection.from_pretrained(modelId),
        tf.AutoProcessor.from_pretrained(modelId, {}),
        tf.CLIPVisionModelWithProjection.from_pretrained(modelId),
      ]);
      return new ClipModel(modelId, tf, tokenizer, textModel, processor, visionModel);
    } catch (err) {
      throw new ModelUnavailableError(`cannot load model ${modelId}: ${err}`);
    }
  }

  async embedTexts(texts: string[]): Promise<number[][]> {
    const out: number[][] = [];
    for (const text of texts) {
      const tokens = this.tokenizer([text], { padding: true, truncation: true });
      const { text_embeds } = await this.textModel(tokens);
      out.push(l2Normalize(Array.from(text_embeds.data as Float32Array)));
    }
    this.dim = out[0]?.length;
    return out;
  }

  async embedImages(paths: string[]): Promise<number[][]> {
    const out: number[][] = [];
    for (const path of paths) {
      let image;
      try {
        image = await this.tf.RawImage.read(path);
      } catch (err) {
        throw new InputUnreadableError(`cannot read image ${path}: ${err}`);
      }
      const inputs = await this.processor(image);
      const { image_embeds } = await this.visionModel(inputs);
      out.push(l2Normalize(Array.from(image_embeds.data as Float32Array)));
    }
    this.dim = out[0]?.length;
    return out;
  }
}

export async function loadModel(modelId: string): Promise<EmbeddingModel> {
  const hashMatch = /^hash:(\d+)$/.exec(modelId);
  if (hashMatch) {
    const dim = Number(hashMatch[1]);
    if (dim < 1) {
      throw new ModelUnavailableError(`hash backend needs a positive dim, got ${modelId}`);
    }
    return new HashModel(dim);
  }
  return ClipModel.load(modelId);
}
