import type { VolumeArray } from "../src/nifti.js";

/** Deterministic PRNG so traces are reproducible across runs. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function mask(
  dims: [number, number, number],
  voxels: Array<[number, number, number]>,
  spacing?: [number, number, number],
): VolumeArray {
  const [nz, ny, nx] = dims;
  const data = new Uint8Array(nz * ny * nx);
  for (const [z, y, x] of voxels) {
    data[z * ny * nx + y * nx + x] = 1;
  }
  return { data, dims, spacing };
}

export function cubeVoxels(
  z0: number, y0: number, x0: number, side: number,
): Array<[number, number, number]> {
  const out: Array<[number, number, number]> = [];
  for (let z = z0; z < z0 + side; z++) {
    for (let y = y0; y < y0 + side; y++) {
      for (let x = x0; x < x0 + side; x++) {
        out.push([z, y, x]);
      }
    }
  }
  return out;
}
