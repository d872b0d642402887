/**
 * Pluggable text encoders.
 *
 * Model identifiers select a backend:
 *   "hash:<dim>"  deterministic feature-hashing encoder, fully offline;
 *                 the default for pipeline validation and CI.
 *   "http:<url>"  remote embedding endpoint (POST {texts: [...]} returning
 *                 {embeddings: [[...], ...]}), the usual way to plug in a
 *                 served checkpoint.
 *
 * Encoders are batch-oriented and must be deterministic for a fixed model
 * and input order; instruction prefixes are applied verbatim before
 * encoding.
 */

export interface Encoder {
  readonly dim: number;
  encode(texts: string[]): Promise<Float32Array[]>;
}

export interface TokenEncoder {
  readonly dim: number;
  encodeTokens(texts: string[]): Promise<Float32Array[][]>;
}

const TOKEN_RE = /[\p{L}\p{N}]+/gu;

export function tokenize(text: string): string[] {
  return text.toLowerCase().match(TOKEN_RE) ?? [];
}

/** FNV-1a 32-bit hash. */
export function fnv1a(text: string, seed = 0x811c9dc5): number {
  let hash = seed >>> 0;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash >>> 0;
}

function l2normalize(vec: Float32Array): Float32Array {
  let sum = 0;
  for (let i = 0; i < vec.length; i++) sum += vec[i] * vec[i];
  const norm = Math.sqrt(sum);
  if (norm > 0) {
    for (let i = 0; i < vec.length; i++) vec[i] /= norm;
  }
  return vec;
}

/** Feature-hashing encoder: tokens land in signed buckets, rows are unit L2. */
export class HashEncoder implements Encoder {
  constructor(readonly dim: number) {
    if (!Number.isInteger(dim) || dim < 1) throw new Error(`bad hash encoder dim ${dim}`);
  }

  encodeOne(text: string): Float32Array {
    const vec = new Float32Array(this.dim);
    for (const token of tokenize(text)) {
      const h = fnv1a(token);
      const sign = fnv1a(token, 0x9747b28c) & 1 ? 1 : -1;
      vec[h % this.dim] += sign;
    }
    return l2normalize(vec);
  }

  async encode(texts: string[]): Promise<Float32Array[]> {
    return texts.map((t) => this.encodeOne(t));
  }
}

/** Per-token hashing encoder; every token row is unit L2. */
export class HashTokenEncoder implements TokenEncoder {
  constructor(readonly dim: number, readonly maxTokens = 64) {
    if (!Number.isInteger(dim) || dim < 2) throw new Error(`bad token encoder dim ${dim}`);
  }

  encodeDoc(text: string): Float32Array[] {
    const tokens = tokenize(text).slice(0, this.maxTokens);
    if (tokens.length === 0) tokens.push("");
    return tokens.map((token) => {
      const vec = new Float32Array(this.dim);
      const h1 = fnv1a(token) % this.dim;
      let h2 = fnv1a(token, 0x9747b28c) % this.dim;
      if (h2 === h1) h2 = (h1 + 1) % this.dim;
      vec[h1] = 0.8;
      vec[h2] = fnv1a(token, 0x7feb352d) & 1 ? 0.6 : -0.6;
      return vec; // 0.8^2 + 0.6^2 = 1: already unit
    });
  }

  async encodeTokens(texts: string[]): Promise<Float32Array[][]> {
    return texts.map((t) => this.encodeDoc(t));
  }
}

/** Remote endpoint encoder; dimension is taken from the first response. */
export class HttpEncoder implements Encoder {
  dim = 0;

  constructor(readonly url: string, readonly batchSize = 32) {}

  async encode(texts: string[]): Promise<Float32Array[]> {
    const out: Float32Array[] = [];
    for (let start = 0; start < texts.length; start += this.batchSize) {
      const batch = texts.slice(start, start + this.batchSize);
      const response = await fetch(this.url, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ texts: batch }),
      });
      if (!response.ok) throw new Error(`encoder endpoint ${this.url} returned ${response.status}`);
      const payload = (await response.json()) as { embeddings: number[][] };
      for (const row of payload.embeddings) {
        if (this.dim === 0) this.dim = row.length;
        if (row.length !== this.dim) throw new Error(`dimension changed mid-export: ${row.length} vs ${this.dim}`);
        out.push(Float32Array.from(row));
      }
    }
    if (out.length !== texts.length) {
      throw new Error(`endpoint returned ${out.length} rows for ${texts.length} texts`);
    }
    return out;
  }
}

export function makeEncoder(model: string): Encoder {
  if (model.startsWith("hash:")) return new HashEncoder(Number(model.slice(5)));
  if (model.startsWith("http:") || model.startsWith("https:")) return new HttpEncoder(model);
  throw new Error(`unknown encoder model ${model}; use hash:<dim> or http(s)://...`);
}

export function makeTokenEncoder(model: string): TokenEncoder {
  if (model.startsWith("hash:")) return new HashTokenEncoder(Number(model.slice(5)));
  throw new Error(`unknown token encoder model ${model}; use hash:<dim>`);
}

/** Cosine text-pair scorer used for offline reranker score export. */
export class HashPairScorer {
  private readonly encoder: HashEncoder;

  constructor(dim = 256) {
    this.encoder = new HashEncoder(dim);
  }

  score(queryText: string, docText: string): number {
    const q = this.encoder.encodeOne(queryText);
    const d = this.encoder.encodeOne(docText);
    let dot = 0;
    for (let i = 0; i < q.length; i++) dot += q[i] * d[i];
    return dot;
  }
}
