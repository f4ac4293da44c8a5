#!/usr/bin/env node
/**
 * vleb-export: ship pretrained-encoder embeddings as VLEB bundles.
 *
 *   vleb-export export --kind image|text --model MODEL_ID --out FILE [inputs...]
 *   vleb-export verify FILE
 *
 * Exit codes: 0 success, 1 usage error, 2 data/model error.
 */

import { exportBundle, verifyExport } from "./exporter.js";

function usage(): void {
  console.error(
    "usage: vleb-export export --kind image|text --model MODEL_ID --out FILE [inputs...]\n" +
      "       vleb-export verify FILE",
  );
}

async function runExport(argv: string[]): Promise<number> {
  let kind: string | undefined;
  let model: string | undefined;
  let out: string | undefined;
  const inputs: string[] = [];
  for (let i = 0; i < argv.length; i += 1) {
    const arg = argv[i];
    if (arg === "--kind") kind = argv[++i];
    else if (arg === "--model") model = argv[++i];
    else if (arg === "--out") out = argv[++i];
    else if (arg.startsWith("--")) {
      console.error(`usage error: unknown flag ${arg}`);
      return 1;
    } else inputs.push(arg);
  }
  if (!kind || !model || !out || inputs.length === 0 || (kind !== "image" && kind !== "text")) {
    usage();
    return 1;
  }
  const count = await exportBundle({ inputs, modelId: model, outPath: out, kind });
  console.log(`wrote ${count} ${kind} embeddings to ${out}`);
  return 0;
}

async function runVerify(argv: string[]): Promise<number> {
  if (argv.length !== 1) {
    usage();
    return 1;
  }
  const diag = await verifyExport(argv[0]);
  console.log(
    `count=${diag.count} dim=${diag.dim} kind=${diag.kind} ` +
      `model=${diag.modelId ?? "unknown"} norms=[${diag.normMin.toFixed(6)}, ${diag.normMax.toFixed(6)}]`,
  );
  for (const finding of diag.findings) {
    console.log(`warning: ${finding}`);
  }
  return 0;
}

async function main(): Promise<number> {
  const [command, ...rest] = process.argv.slice(2);
  try {
    if (command === "export") return await runExport(rest);
    if (command === "verify") return await runVerify(rest);
    usage();
    return 1;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 2;
  }
}

main().then((code) => {
  process.exitCode = code;
});
