/**
 * Export jobs: view file in, engine-format file out. Row order always equals
 * input document order, and exports are deterministic for a fixed model and
 * batch order.
 */

import { makeEncoder, makeTokenEncoder, HashPairScorer } from "./encoders.js";
import { readRunTsv, readViewFile, writeEmb1, writeScoreTableTsv, writeTok1 } from "./formats.js";

export interface EncodeJob {
  model: string;
  viewPath: string;
  outPath: string;
  batchSize?: number;
  queryPrefix?: string;
  passagePrefix?: string;
  asQueries?: boolean;
}

function applyPrefix(texts: string[], job: EncodeJob): string[] {
  const prefix = job.asQueries ? job.queryPrefix : job.passagePrefix;
  return prefix ? texts.map((t) => prefix + t) : texts;
}

export async function exportEmbeddings(job: EncodeJob): Promise<{ count: number; dim: number }> {
  const docs = readViewFile(job.viewPath);
  if (docs.length === 0) throw new Error(`${job.viewPath}: no documents to encode`);
  const encoder = makeEncoder(job.model);
  const batchSize = job.batchSize ?? 64;
  const rows: Float32Array[] = [];
  for (let start = 0; start < docs.length; start += batchSize) {
    const batch = docs.slice(start, start + batchSize).map((d) => d.text);
    rows.push(...(await encoder.encode(applyPrefix(batch, job))));
  }
  const dim = encoder.dim || rows[0].length;
  writeEmb1(job.outPath, docs.map((d) => d.id), rows, dim);
  return { count: rows.length, dim };
}

export async function exportTokenEmbeddings(job: EncodeJob): Promise<{ count: number; dim: number }> {
  const docs = readViewFile(job.viewPath);
  if (docs.length === 0) throw new Error(`${job.viewPath}: no documents to encode`);
  const encoder = makeTokenEncoder(job.model);
  const batchSize = job.batchSize ?? 64;
  const blocks: Float32Array[][] = [];
  for (let start = 0; start < docs.length; start += batchSize) {
    const batch = docs.slice(start, start + batchSize).map((d) => d.text);
    // corpus side is encoded in document mode: no query prefix augmentation
    blocks.push(...(await encoder.encodeTokens(job.asQueries ? applyPrefix(batch, job) : batch)));
  }
  writeTok1(job.outPath, docs.map((d) => d.id), blocks, encoder.dim);
  return { count: blocks.length, dim: encoder.dim };
}

export interface RerankJob {
  runPath: string;
  K: number;
  queriesPath: string;
  corpusViewPath: string;
  outPath: string;
  dim?: number;
}

export async function exportRerankerScores(job: RerankJob): Promise<{ pairs: number }> {
  const run = readRunTsv(job.runPath);
  const queries = new Map(readViewFile(job.queriesPath).map((d) => [d.id, d.text]));
  const corpus = new Map(readViewFile(job.corpusViewPath).map((d) => [d.id, d.text]));
  const scorer = new HashPairScorer(job.dim ?? 256);
  const rows: Array<[string, string, number]> = [];
  for (const [queryId, entries] of run) {
    const queryText = queries.get(queryId);
    if (queryText === undefined) throw new Error(`query ${queryId} has no text in ${job.queriesPath}`);
    for (const entry of entries.slice(0, job.K)) {
      const docText = corpus.get(entry.docId);
      if (docText === undefined) throw new Error(`candidate ${entry.docId} has no text in ${job.corpusViewPath}`);
      rows.push([queryId, entry.docId, scorer.score(queryText, docText)]);
    }
  }
  writeScoreTableTsv(job.outPath, rows);
  return { pairs: rows.length };
}
