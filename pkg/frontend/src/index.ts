export { exportBundle, verifyExport } from "./exporter.js";
export type { ExportDiagnostics, ExportJob } from "./exporter.js";
export { loadModel, l2Normalize, ModelUnavailableError, InputUnreadableError } from "./models.js";
export type { EmbeddingModel } from "./models.js";
export {
  BadMagicError,
  decodeBundle,
  encodeBundle,
  KINDS,
  MetaParseError,
  NonFiniteError,
  readBundle,
  TruncatedFileError,
  UnsupportedVersionError,
  VlebFormatError,
  writeBundle,
} from "./vleb.js";
export type { BundleKind, BundleMeta, DecodedBundle } from "./vleb.js";
