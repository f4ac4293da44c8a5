/**
 * Export embeddings from a pretrained encoder into a VLEB bundle.
 *
 * Rows are written in input order, one per input, L2-normalized. Labels are
 * the text strings themselves (text kind) or the file basenames (image
 * kind); the model id is recorded under meta.extra.model_id.
 */

import { basename } from "node:path";

import { loadModel } from "./models.js";
import { BundleMeta, readBundle, writeBundle } from "./vleb.js";

export interface ExportJob {
  inputs: string[];
  modelId: string;
  outPath: string;
  kind: "image" | "text";
}

export async function exportBundle(job: ExportJob): Promise<number> {
  if (job.inputs.length === 0) {
    throw new Error("no inputs to export");
  }
  if (job.kind !== "image" && job.kind !== "text") {
    throw new Error(`kind must be "image" or "text", got ${job.kind}`);
  }
  const model = await loadModel(job.modelId);
  const rows =
    job.kind === "text"
      ? await model.embedTexts(job.inputs)
      : await model.embedImages(job.inputs);
  const labels = job.kind === "text" ? [...job.inputs] : job.inputs.map((p) => basename(p));
  const meta: BundleMeta = {
    kind: job.kind,
    labels,
    extra: { model_id: model.id },
  };
  await writeBundle(rows, meta, job.outPath);
  return rows.length;
}

export interface ExportDiagnostics {
  count: number;
  dim: number;
  kind: string;
  modelId: string | undefined;
  normMin: number;
  normMax: number;
  findings: string[];
}

/** Re-validate a bundle on disk and report row-norm bounds. */
export async function verifyExport(path: string): Promise<ExportDiagnostics> {
  const bundle = await readBundle(path);
  let normMin = Infinity;
  let normMax = -Infinity;
  const findings: string[] = [];
  bundle.rows.forEach((row, i) => {
    let sq = 0;
    for (const v of row) sq += v * v;
    const norm = Math.sqrt(sq);
    normMin = Math.min(normMin, norm);
    normMax = Math.max(normMax, norm);
    if (Math.abs(norm - 1) > 1e-5) {
      findings.push(`row ${i} norm ${norm.toFixed(6)} deviates from 1 by more than 1e-5`);
    }
  });
  if (bundle.count === 0) {
    normMin = 0;
    normMax = 0;
  }
  if (bundle.meta.labels && bundle.meta.labels.length !== bundle.count) {
    findings.push("label count does not match row count");
  }
  return {
    count: bundle.count,
    dim: bundle.dim,
    kind: bundle.meta.kind,
    modelId: (bundle.meta.extra as { model_id?: string } | undefined)?.model_id,
    normMin,
    normMax,
    findings,
  };
}
