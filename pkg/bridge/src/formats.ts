/**
 * Binary and tabular formats shared with the evaluation engine.
 *
 * EMB1 (little-endian): magic "EMB1", u32 version=1, u32 dim, u64 count,
 * then count x dim float32 row-major; ids sidecar at "<path>.ids", one id
 * per line, row-aligned.
 *
 * TOK1: magic "TOK1", u32 version=1, u32 dim, then per document:
 * u32 id byte length, id utf-8, u32 nTokens, nTokens x dim float32.
 *
 * Score tables are TSV "query-id\tdoc-id\tscore"; runs are TREC-style TSV
 * "query-id\tdoc-id\trank\tscore\tsystem"; view files are JSONL records
 * with _id and text.
 */

import * as fs from "node:fs";

export interface ViewDoc {
  id: string;
  text: string;
}

export function readViewFile(path: string): ViewDoc[] {
  const docs: ViewDoc[] = [];
  const seen = new Set<string>();
  const lines = fs.readFileSync(path, "utf-8").split("\n");
  lines.forEach((line, i) => {
    if (!line.trim()) return;
    let record: unknown;
    try {
      record = JSON.parse(line);
    } catch {
      throw new Error(`${path}: line ${i + 1}: not valid JSON`);
    }
    const rec = record as { _id?: unknown; text?: unknown };
    if (typeof rec._id !== "string" || typeof rec.text !== "string") {
      throw new Error(`${path}: line ${i + 1}: expected _id and text fields`);
    }
    if (seen.has(rec._id)) throw new Error(`${path}: duplicate _id ${rec._id}`);
    seen.add(rec._id);
    docs.push({ id: rec._id, text: rec.text });
  });
  return docs;
}

export function writeEmb1(path: string, ids: string[], rows: Float32Array[], dim: number): void {
  if (ids.length !== rows.length) {
    throw new Error(`${ids.length} ids for ${rows.length} rows`);
  }
  for (const row of rows) {
    if (row.length !== dim) throw new Error(`row has dim ${row.length}, expected ${dim}`);
  }
  const header = Buffer.alloc(20);
  header.write("EMB1", 0, "ascii");
  header.writeUInt32LE(1, 4);
  header.writeUInt32LE(dim, 8);
  header.writeBigUInt64LE(BigInt(rows.length), 12);
  const body = Buffer.alloc(rows.length * dim * 4);
  rows.forEach((row, r) => {
    for (let j = 0; j < dim; j++) body.writeFloatLE(row[j], (r * dim + j) * 4);
  });
  fs.writeFileSync(path, Buffer.concat([header, body]));
  fs.writeFileSync(path + ".ids", ids.map((id) => id + "\n").join(""));
}

export function readEmb1(path: string): { ids: string[]; rows: Float32Array[]; dim: number } {
  const data = fs.readFileSync(path);
  if (data.length < 20 || data.toString("ascii", 0, 4) !== "EMB1") {
    throw new Error(`${path}: bad magic, expected EMB1`);
  }
  const version = data.readUInt32LE(4);
  if (version !== 1) throw new Error(`${path}: unsupported EMB1 version ${version}`);
  const dim = data.readUInt32LE(8);
  const count = Number(data.readBigUInt64LE(12));
  if (data.length !== 20 + count * dim * 4) {
    throw new Error(`${path}: payload is ${data.length - 20} bytes, header implies ${count * dim * 4}`);
  }
  const rows: Float32Array[] = [];
  for (let r = 0; r < count; r++) {
    const row = new Float32Array(dim);
    for (let j = 0; j < dim; j++) row[j] = data.readFloatLE(20 + (r * dim + j) * 4);
    rows.push(row);
  }
  const ids = fs
    .readFileSync(path + ".ids", "utf-8")
    .split("\n")
    .filter((l) => l.length > 0);
  if (ids.length !== count) throw new Error(`${path}.ids: ${ids.length} ids for ${count} rows`);
  return { ids, rows, dim };
}

export function writeTok1(path: string, ids: string[], blocks: Float32Array[][], dim: number): void {
  if (ids.length !== blocks.length) {
    throw new Error(`${ids.length} ids for ${blocks.length} token blocks`);
  }
  const parts: Buffer[] = [];
  const header = Buffer.alloc(12);
  header.write("TOK1", 0, "ascii");
  header.writeUInt32LE(1, 4);
  header.writeUInt32LE(dim, 8);
  parts.push(header);
  ids.forEach((id, i) => {
    const block = blocks[i];
    if (block.length < 1) throw new Error(`doc ${id} has zero token rows`);
    const idBytes = Buffer.from(id, "utf-8");
    const meta = Buffer.alloc(4 + idBytes.length + 4);
    meta.writeUInt32LE(idBytes.length, 0);
    idBytes.copy(meta, 4);
    meta.writeUInt32LE(block.length, 4 + idBytes.length);
    parts.push(meta);
    const body = Buffer.alloc(block.length * dim * 4);
    block.forEach((token, t) => {
      if (token.length !== dim) throw new Error(`doc ${id}: token dim ${token.length}, expected ${dim}`);
      for (let j = 0; j < dim; j++) body.writeFloatLE(token[j], (t * dim + j) * 4);
    });
    parts.push(body);
  });
  fs.writeFileSync(path, Buffer.concat(parts));
}

export function readTok1(path: string): { ids: string[]; blocks: Float32Array[][]; dim: number } {
  const data = fs.readFileSync(path);
  if (data.length < 12 || data.toString("ascii", 0, 4) !== "TOK1") {
    throw new Error(`${path}: bad magic, expected TOK1`);
  }
  const version = data.readUInt32LE(4);
  if (version !== 1) throw new Error(`${path}: unsupported TOK1 version ${version}`);
  const dim = data.readUInt32LE(8);
  let off = 12;
  const ids: string[] = [];
  const blocks: Float32Array[][] = [];
  while (off < data.length) {
    if (off + 4 > data.length) throw new Error(`${path}: truncated record header`);
    const idLen = data.readUInt32LE(off);
    off += 4;
    const id = data.toString("utf-8", off, off + idLen);
    off += idLen;
    const nTokens = data.readUInt32LE(off);
    off += 4;
    if (nTokens < 1) throw new Error(`${path}: doc ${id} has zero tokens`);
    if (off + nTokens * dim * 4 > data.length) throw new Error(`${path}: truncated token block for ${id}`);
    const block: Float32Array[] = [];
    for (let t = 0; t < nTokens; t++) {
      const token = new Float32Array(dim);
      for (let j = 0; j < dim; j++) token[j] = data.readFloatLE(off + (t * dim + j) * 4);
      block.push(token);
    }
    off += nTokens * dim * 4;
    ids.push(id);
    blocks.push(block);
  }
  return { ids, blocks, dim };
}

export interface RunEntry {
  queryId: string;
  docId: string;
  rank: number;
}

export function readRunTsv(path: string): Map<string, RunEntry[]> {
  const byQuery = new Map<string, RunEntry[]>();
  const lines = fs.readFileSync(path, "utf-8").split("\n");
  lines.forEach((line, i) => {
    if (!line || (i === 0 && line.startsWith("query-id\t"))) return;
    const parts = line.split("\t");
    if (parts.length !== 5) throw new Error(`${path}: line ${i + 1}: expected 5 tab-separated fields`);
    const entry = { queryId: parts[0], docId: parts[1], rank: Number(parts[2]) };
    if (!Number.isFinite(entry.rank)) throw new Error(`${path}: line ${i + 1}: bad rank`);
    const bucket = byQuery.get(entry.queryId) ?? [];
    bucket.push(entry);
    byQuery.set(entry.queryId, bucket);
  });
  return byQuery;
}

export function writeScoreTableTsv(path: string, rows: Array<[string, string, number]>): void {
  const sorted = [...rows].sort((a, b) => (a[0] < b[0] ? -1 : a[0] > b[0] ? 1 : a[1] < b[1] ? -1 : a[1] > b[1] ? 1 : 0));
  const lines = ["query-id\tdoc-id\tscore"];
  for (const [qid, did, score] of sorted) {
    if (!Number.isFinite(score)) throw new Error(`non-finite score for (${qid}, ${did})`);
    lines.push(`${qid}\t${did}\t${score}`);
  }
  fs.writeFileSync(path, lines.join("\n") + "\n");
}
