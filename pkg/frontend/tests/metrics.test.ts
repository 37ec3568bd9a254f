import { describe, expect, it } from "vitest";

import { evaluateCase } from "../src/metrics.js";
import { LiversegError } from "../src/runner.js";
import { cubeVoxels, mask } from "./helpers.js";

describe("evaluateCase binding", () => {
  it("scores identical masks as perfect", () => {
    const m = mask([4, 4, 4], cubeVoxels(1, 1, 1, 2));
    const report = evaluateCase(m, m, "003");
    expect(report.recordId).toBe("003");
    expect(report.dicePct).toBe(100);
    expect(report.iouPct).toBe(100);
    expect(report.rvd).toBe(0);
    expect(report.asdMm).toBe(0);
    expect(report.msdMm).toBe(0);
  });

  it("scores the half-overlap cube at dice 50", () => {
    const gt = mask([6, 6, 8], cubeVoxels(1, 1, 1, 4));
    const pred = mask([6, 6, 8], cubeVoxels(1, 1, 3, 4));
    const report = evaluateCase(pred, gt);
    expect(report.dicePct).toBeCloseTo(50.0, 12);
    expect(report.iouPct).toBeCloseTo((100 * 32) / 96, 12);
    expect(report.rvd).toBe(0);
  });

  it("applies anisotropic spacing to surface distances", () => {
    const a = mask([1, 1, 7], [[0, 0, 1]], [1, 1, 2]);
    const b = mask([1, 1, 7], [[0, 0, 4]], [1, 1, 2]);
    const report = evaluateCase(a, b);
    expect(report.asdMm).toBeCloseTo(6.0, 12);
    expect(report.msdMm).toBeCloseTo(6.0, 12);
    expect(report.hd95Mm).toBeCloseTo(6.0, 12);
  });

  it("reports undefined surface metrics as null for an empty prediction", () => {
    const gt = mask([4, 4, 4], cubeVoxels(1, 1, 1, 2));
    const empty = mask([4, 4, 4], []);
    const report = evaluateCase(empty, gt);
    expect(report.dicePct).toBe(0);
    expect(report.rvd).toBe(-1);
    expect(report.asdMm).toBeNull();
    expect(report.hd95Mm).toBeNull();
  });

  it("mirrors ShapeMismatch for differing geometries", () => {
    const a = mask([3, 3, 3], [[1, 1, 1]]);
    const b = mask([3, 3, 4], [[1, 1, 1]]);
    try {
      evaluateCase(a, b);
      expect.unreachable("should have thrown");
    } catch (err) {
      expect(err).toBeInstanceOf(LiversegError);
      expect((err as LiversegError).name).toBe("ShapeMismatch");
    }
  });

  it("rejects inconsistent dims host-side", () => {
    expect(() =>
      evaluateCase(
        { data: new Uint8Array(7), dims: [2, 2, 2] },
        { data: new Uint8Array(8), dims: [2, 2, 2] },
      ),
    ).toThrowError(TypeError);
  });
});
