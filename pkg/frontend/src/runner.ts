/**
 * Process-level bridge to the liverseg command line.
 *
 * The core toolkit is consumed strictly through its public surfaces: the
 * CLI subcommands and their file formats. Domain failures arrive on stderr
 * as "ErrorName: message" with exit code 1 and are rethrown host-side as
 * errors carrying the same name.
 */

import { spawnSync } from "node:child_process";

/** Error raised by the core toolkit, re-surfaced with its original name. */
export class LiversegError extends Error {
  readonly exitCode: number;

  constructor(name: string, message: string, exitCode: number) {
    super(message);
    this.name = name;
    this.exitCode = exitCode;
  }
}

/** Command used to launch the CLI; override with LIVERSEG_CLI="python3 -m liverseg". */
export function cliCommand(): string[] {
  const fromEnv = process.env.LIVERSEG_CLI;
  if (fromEnv && fromEnv.trim().length > 0) {
    return fromEnv.trim().split(/\s+/);
  }
  return ["python3", "-m", "liverseg"];
}

export interface CliResult {
  stdout: string;
  stderr: string;
}

export function runCli(args: string[]): CliResult {
  const [command, ...prefix] = cliCommand();
  const proc = spawnSync(command, [...prefix, ...args], {
    encoding: "utf-8",
    maxBuffer: 64 * 1024 * 1024,
  });
  if (proc.error) {
    throw new LiversegError("SpawnFailure", String(proc.error), -1);
  }
  if (proc.status !== 0) {
    const line = (proc.stderr ?? "").trim().split("\n").pop() ?? "";
    const match = /^([A-Za-z0-9_]+): (.*)$/.exec(line);
    if (match) {
      throw new LiversegError(match[1], match[2], proc.status ?? 1);
    }
    throw new LiversegError("CliFailure", line || `exit code ${proc.status}`, proc.status ?? 1);
  }
  return { stdout: proc.stdout ?? "", stderr: proc.stderr ?? "" };
}

/** Format a number the way Python's float() parses losslessly. */
export function pythonFloat(x: number): string {
  if (Number.isNaN(x)) return "nan";
  if (x === Infinity) return "inf";
  if (x === -Infinity) return "-inf";
  return String(x);
}
