/**
 * Scheduler bindings that forward every observation to the core toolkit.
 *
 * The core schedulers are deterministic state machines, so a bound
 * scheduler keeps the observed loss prefix and replays it through the
 * `schedule-sim` subcommand on each observation; the trajectory's last row
 * is the machine's state after that observation. Nothing is recomputed
 * host-side, and the LR values returned are exactly the core's (the raw
 * CSV strings are kept alongside the parsed numbers).
 */

import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { pythonFloat, runCli } from "./runner.js";

export interface TrajectoryRow {
  epoch: number;
  lr: number;
  lrString: string;
  valLoss: number;
  stopped: boolean;
}

export function simulateTrajectory(
  schedulerArgs: string[],
  losses: number[],
  epochsStop?: number,
): TrajectoryRow[] {
  const dir = mkdtempSync(join(tmpdir(), "liverseg-sim-"));
  try {
    const tracePath = join(dir, "losses.txt");
    writeFileSync(tracePath, losses.map(pythonFloat).join("\n") + "\n");
    const args = ["schedule-sim", ...schedulerArgs, "--losses", tracePath];
    if (epochsStop !== undefined) {
      args.push("--epochs-stop", String(epochsStop));
    }
    const { stdout } = runCli(args);
    const lines = stdout.trim().split("\n");
    return lines.slice(1).map((line) => {
      const [epoch, lr, , valLoss, stopped] = line.split(",");
      return {
        epoch: Number(epoch),
        lr: Number(lr),
        lrString: lr,
        valLoss: Number(valLoss),
        stopped: stopped === "1",
      };
    });
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

function definedFlags(pairs: Array<[string, number | string | undefined]>): string[] {
  const out: string[] = [];
  for (const [flag, value] of pairs) {
    if (value !== undefined) {
      out.push(flag, String(value));
    }
  }
  return out;
}

export interface OneCycleOptions {
  maxLr: number;
  totalEpochs?: number;
  stepsPerEpoch?: number;
  pctStart?: number;
  anneal?: "cosine" | "linear";
  divFactor?: number;
  finalDivFactor?: number;
}

export interface PlateauOptions {
  initialLr: number;
  factor?: number;
  epochsPatience?: number;
  threshold?: number;
  minLr?: number;
}

abstract class BoundScheduler {
  readonly losses: number[] = [];
  /** Raw LR column from the core's last replay, one string per epoch. */
  lrStrings: string[] = [];

  protected abstract schedulerArgs(): string[];

  /** Forward one validation loss; returns the LR now in force. */
  observe(valLoss: number): number {
    this.losses.push(valLoss);
    let rows: TrajectoryRow[];
    try {
      rows = simulateTrajectory(this.schedulerArgs(), this.losses);
    } catch (err) {
      this.losses.pop(); // the core rejected this observation
      throw err;
    }
    this.lrStrings = rows.map((r) => r.lrString);
    return rows[rows.length - 1].lr;
  }

  /** LR sequence for a whole trace in one core call. */
  lrSequence(losses: number[]): number[] {
    return simulateTrajectory(this.schedulerArgs(), losses).map((r) => r.lr);
  }
}

export class OneCycle extends BoundScheduler {
  readonly kind = "one_cycle";

  constructor(readonly options: OneCycleOptions) {
    super();
  }

  protected schedulerArgs(): string[] {
    const o = this.options;
    return [
      "--scheduler", "onecycle",
      "--max-lr", String(o.maxLr),
      ...definedFlags([
        ["--epochs", o.totalEpochs],
        ["--steps-per-epoch", o.stepsPerEpoch],
        ["--pct-start", o.pctStart],
        ["--anneal", o.anneal],
        ["--div-factor", o.divFactor],
        ["--final-div-factor", o.finalDivFactor],
      ]),
    ];
  }
}

export class Plateau extends BoundScheduler {
  readonly kind = "plateau";

  constructor(readonly options: PlateauOptions) {
    super();
  }

  protected schedulerArgs(): string[] {
    const o = this.options;
    return [
      "--scheduler", "plateau",
      "--initial-lr", String(o.initialLr),
      ...definedFlags([
        ["--lr-factor", o.factor],
        ["--epochs-patience", o.epochsPatience],
        ["--threshold", o.threshold],
        ["--min-lr", o.minLr],
      ]),
    ];
  }
}

export class EarlyStop {
  readonly losses: number[] = [];
  private fired = false;

  constructor(readonly epochsStop: number = 6) {}

  /** Forward one validation loss; true means training should stop. */
  observe(valLoss: number): boolean {
    if (this.fired) {
      return true;
    }
    this.losses.push(valLoss);
    let rows: TrajectoryRow[];
    try {
      // the early-stop counter is scheduler-independent; ride a plateau sim
      rows = simulateTrajectory(
        ["--scheduler", "plateau", "--initial-lr", "1.0"],
        this.losses,
        this.epochsStop,
      );
    } catch (err) {
      this.losses.pop();
      throw err;
    }
    this.fired = rows.length < this.losses.length
      || rows[rows.length - 1].stopped;
    return this.fired;
  }
}
