/**
 * Thin wrapper exposing fit/predict/save/load over the vecboost engine.
 *
 * The engine is consumed strictly through its public surfaces: the CLI
 * (train/predict subcommands) and the versioned model file format.  Arrays
 * cross the boundary as CSV written with shortest round-trip number
 * formatting, which both sides parse back to identical doubles.
 */

import { spawnSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

/** Params keys are the engine CLI flag names without the leading dashes. */
export type BoosterParams = {
  loss?: "mse" | "softmax_ce";
  mode?: "mo_dense" | "mo_sparse" | "mo_restricted" | "mo_exact" | "so_baseline";
  lr?: number;
  depth?: number;
  "max-leaves"?: number;
  "min-samples"?: number;
  "gain-threshold"?: number;
  bins?: number;
  topk?: number;
  rounds?: number;
  patience?: number;
  lambda?: number;
  seed?: number;
  workers?: number;
};

export interface HistoryRecord {
  round: number;
  trainLoss: number;
  evalMetric: number;
  seconds: number;
}

export class VecboostError extends Error {
  constructor(message: string, public readonly exitCode?: number) {
    super(message);
    this.name = "VecboostError";
  }
}

function engineCommand(): { cmd: string; baseArgs: string[] } {
  const python = process.env.VECBOOST_PYTHON ?? "python3";
  return { cmd: python, baseArgs: ["-m", "vecboost.cli"] };
}

function runEngine(args: string[]): string {
  const { cmd, baseArgs } = engineCommand();
  const out = spawnSync(cmd, [...baseArgs, ...args], {
    encoding: "utf-8",
    maxBuffer: 256 * 1024 * 1024,
  });
  if (out.error) {
    throw new VecboostError(`failed to launch engine: ${out.error.message}`);
  }
  if (out.status !== 0) {
    throw new VecboostError(
      `engine exited with code ${out.status}: ${out.stderr.trim()}`,
      out.status ?? undefined,
    );
  }
  return out.stdout;
}

/** Shortest round-trip decimal form; both sides reparse to the same double. */
function formatNumber(x: number): string {
  if (!Number.isFinite(x)) {
    throw new VecboostError(`non-finite value ${x} cannot cross the boundary`);
  }
  return String(x);
}

function writeMatrixCsv(filePath: string, rows: number[][], width?: number): void {
  const lines: string[] = [];
  for (const row of rows) {
    if (width !== undefined && row.length !== width) {
      throw new VecboostError(
        `ragged input: expected ${width} columns, found ${row.length}`,
      );
    }
    lines.push(row.map(formatNumber).join(","));
  }
  fs.writeFileSync(filePath, lines.join("\n") + (lines.length ? "\n" : ""));
}

function parsePredictionsCsv(text: string): number[][] {
  const lines = text.split("\n").filter((ln) => ln.length > 0);
  // first line is the y0,y1,... header
  return lines.slice(1).map((ln) => ln.split(",").map(Number));
}

function parseHistoryCsv(text: string): HistoryRecord[] {
  const lines = text.split("\n").filter((ln) => ln.length > 0);
  return lines.slice(1).map((ln) => {
    const [round, trainLoss, evalMetric, seconds] = ln.split(",");
    return {
      round: Number(round),
      trainLoss: Number(trainLoss),
      evalMetric: Number(evalMetric),
      seconds: Number(seconds),
    };
  });
}

function paramsToFlags(params: BoosterParams): string[] {
  const flags: string[] = [];
  for (const [key, value] of Object.entries(params)) {
    if (value === undefined || value === null) continue;
    flags.push(`--${key}`, String(value));
  }
  return flags;
}

/**
 * A trained (or loaded) ensemble handle.  The handle owns a scratch
 * directory holding the model file until close().
 */
export class Booster {
  private workdir: string | null;
  private modelPath: string;
  readonly history: HistoryRecord[];
  readonly bestRound: number | null;

  private constructor(
    workdir: string,
    modelPath: string,
    history: HistoryRecord[],
    bestRound: number | null,
  ) {
    this.workdir = workdir;
    this.modelPath = modelPath;
    this.history = history;
    this.bestRound = bestRound;
  }

  /** Train an ensemble on in-memory arrays; targets are one column set per row. */
  static fit(
    features: number[][],
    targets: number[][],
    params: BoosterParams = {},
  ): Booster {
    if (features.length === 0 || targets.length === 0) {
      throw new VecboostError("fit needs at least one sample");
    }
    if (features.length !== targets.length) {
      throw new VecboostError(
        `row mismatch: ${features.length} feature rows vs ${targets.length} target rows`,
      );
    }
    const m = features[0].length;
    const d = targets[0].length;
    const workdir = fs.mkdtempSync(path.join(os.tmpdir(), "vecboost-"));
    try {
      const dataPath = path.join(workdir, "train.csv");
      const rows = features.map((xr, i) => [...xr, ...targets[i]]);
      writeMatrixCsv(dataPath, rows, m + d);
      const modelPath = path.join(workdir, "model.txt");
      const stdout = runEngine([
        "train",
        "--data", dataPath,
        "--labels", String(d),
        "--model", modelPath,
        ...paramsToFlags(params),
      ]);
      const history = parseHistoryCsv(
        fs.readFileSync(modelPath + ".history", "utf-8"),
      );
      const bestMatch = stdout.match(/best_round (\d+)/);
      const bestRound = bestMatch ? Number(bestMatch[1]) : null;
      fs.rmSync(dataPath);
      return new Booster(workdir, modelPath, history, bestRound);
    } catch (err) {
      fs.rmSync(workdir, { recursive: true, force: true });
      throw err;
    }
  }

  /** Reopen a saved model file. */
  static load(modelFile: string): Booster {
    if (!fs.existsSync(modelFile)) {
      throw new VecboostError(`no such model file: ${modelFile}`);
    }
    const workdir = fs.mkdtempSync(path.join(os.tmpdir(), "vecboost-"));
    const modelPath = path.join(workdir, "model.txt");
    fs.copyFileSync(modelFile, modelPath);
    const handle = new Booster(workdir, modelPath, [], null);
    handle.predictCheck();
    return handle;
  }

  private ensureOpen(): void {
    if (this.workdir === null) {
      throw new VecboostError("operation on a closed booster handle");
    }
  }

  private predictCheck(): void {
    // cheap validation: the engine must accept the model file
    this.ensureOpen();
    const header = fs.readFileSync(this.modelPath, "utf-8").split("\n", 1)[0];
    if (header !== "vecboost model v1") {
      this.close();
      throw new VecboostError(`unsupported model header: ${header}`);
    }
  }

  /** Predict raw scores (or softmax probabilities) for a feature matrix. */
  predict(features: number[][], opts: { proba?: boolean } = {}): number[][] {
    this.ensureOpen();
    const dataPath = path.join(this.workdir!, "predict_in.csv");
    const outPath = path.join(this.workdir!, "predict_out.csv");
    writeMatrixCsv(dataPath, features);
    try {
      runEngine([
        "predict",
        "--data", dataPath,
        "--model", this.modelPath,
        "--out", outPath,
        ...(opts.proba ? ["--proba"] : []),
      ]);
      return parsePredictionsCsv(fs.readFileSync(outPath, "utf-8"));
    } finally {
      fs.rmSync(dataPath, { force: true });
      fs.rmSync(outPath, { force: true });
    }
  }

  /** Copy the model file, byte for byte, to the given path. */
  save(filePath: string): void {
    this.ensureOpen();
    fs.copyFileSync(this.modelPath, filePath);
  }

  /** The serialized model text (the stable on-disk format). */
  modelText(): string {
    this.ensureOpen();
    return fs.readFileSync(this.modelPath, "utf-8");
  }

  /** Release the scratch directory; the handle is unusable afterwards. */
  close(): void {
    if (this.workdir !== null) {
      fs.rmSync(this.workdir, { recursive: true, force: true });
      this.workdir = null;
    }
  }
}
