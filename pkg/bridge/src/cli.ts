#!/usr/bin/env node
/**
 * patrank-bridge <command> [flags]
 *
 * Commands:
 *   export-emb     --model hash:64 --view view.jsonl --out docs.emb1
 *                  [--batch-size 64] [--query-prefix S] [--passage-prefix S] [--as-queries]
 *   export-tok     --model hash:32 --view view.jsonl --out docs.tok1 [--batch-size 64]
 *   export-scores  --run run.tsv --K 100 --queries queries.jsonl --corpus view.jsonl --out scores.tsv [--dim 256]
 */

import { exportEmbeddings, exportRerankerScores, exportTokenEmbeddings } from "./jobs.js";

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) throw new Error(`unexpected argument ${arg}`);
    const key = arg.slice(2);
    if (key === "as-queries") {
      flags.set(key, "true");
    } else {
      const value = argv[++i];
      if (value === undefined) throw new Error(`flag --${key} needs a value`);
      flags.set(key, value);
    }
  }
  return flags;
}

function need(flags: Map<string, string>, key: string): string {
  const value = flags.get(key);
  if (value === undefined) throw new Error(`missing required flag --${key}`);
  return value;
}

async function main(): Promise<number> {
  const [command, ...rest] = process.argv.slice(2);
  try {
    const flags = parseFlags(rest);
    if (command === "export-emb") {
      const result = await exportEmbeddings({
        model: need(flags, "model"),
        viewPath: need(flags, "view"),
        outPath: need(flags, "out"),
        batchSize: flags.has("batch-size") ? Number(flags.get("batch-size")) : undefined,
        queryPrefix: flags.get("query-prefix"),
        passagePrefix: flags.get("passage-prefix"),
        asQueries: flags.has("as-queries"),
      });
      console.log(`rows\t${result.count}\tdim\t${result.dim}`);
    } else if (command === "export-tok") {
      const result = await exportTokenEmbeddings({
        model: need(flags, "model"),
        viewPath: need(flags, "view"),
        outPath: need(flags, "out"),
        batchSize: flags.has("batch-size") ? Number(flags.get("batch-size")) : undefined,
        queryPrefix: flags.get("query-prefix"),
        asQueries: flags.has("as-queries"),
      });
      console.log(`docs\t${result.count}\tdim\t${result.dim}`);
    } else if (command === "export-scores") {
      const result = await exportRerankerScores({
        runPath: need(flags, "run"),
        K: Number(need(flags, "K")),
        queriesPath: need(flags, "queries"),
        corpusViewPath: need(flags, "corpus"),
        outPath: need(flags, "out"),
        dim: flags.has("dim") ? Number(flags.get("dim")) : undefined,
      });
      console.log(`pairs\t${result.pairs}`);
    } else {
      console.error("usage: patrank-bridge <export-emb|export-tok|export-scores> [flags]");
      return 1;
    }
    return 0;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : String(err)}`);
    return 1;
  }
}

main().then((code) => {
  process.exitCode = code;
});
