/**
 * evaluateCase binding: ships binary masks to the core evaluator through
 * temporary NIfTI files (one documented copy at the process boundary) and
 * parses the JSON metric row it prints.
 */

import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { writeNifti, type VolumeArray } from "./nifti.js";
import { runCli } from "./runner.js";

export interface MetricReport {
  recordId: string;
  dicePct: number;
  iouPct: number;
  rvd: number | null;
  asdMm: number | null;
  rmsdMm: number | null;
  msdMm: number | null;
  hd95Mm: number | null;
}

export function evaluateCase(
  pred: VolumeArray,
  gt: VolumeArray,
  recordId: string = "",
): MetricReport {
  const dir = mkdtempSync(join(tmpdir(), "liverseg-eval-"));
  try {
    const predPath = join(dir, "pred.nii.gz");
    const gtPath = join(dir, "gt.nii.gz");
    writeNifti(predPath, pred);
    writeNifti(gtPath, gt);
    const { stdout } = runCli([
      "evaluate",
      "--pred", predPath,
      "--gt", gtPath,
      "--format", "json",
      "--record-id", recordId,
    ]);
    const row = JSON.parse(stdout.trim().split("\n")[0]);
    return {
      recordId: row.record_id,
      dicePct: row.dice_pct,
      iouPct: row.iou_pct,
      rvd: row.rvd,
      asdMm: row.asd_mm,
      rmsdMm: row.rmsd_mm,
      msdMm: row.msd_mm,
      hd95Mm: row.hd95_mm,
    };
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}
