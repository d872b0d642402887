export { Encoder, HashEncoder, HashPairScorer, HashTokenEncoder, HttpEncoder, TokenEncoder, fnv1a, makeEncoder, makeTokenEncoder, tokenize } from "./encoders.js";
export { readEmb1, readRunTsv, readTok1, readViewFile, writeEmb1, writeScoreTableTsv, writeTok1 } from "./formats.js";
export { EncodeJob, RerankJob, exportEmbeddings, exportRerankerScores, exportTokenEmbeddings } from "./jobs.js";
