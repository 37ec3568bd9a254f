/**
 * Minimal little-endian NIfTI-1 writer, enough to hand volumes to the core
 * toolkit. Arrays use the toolkit's (z, y, x) layout: `dims` is
 * [slices, rows, columns], `spacing` millimetres per voxel in the same
 * order, and `data` is flat C-order (so x varies fastest, which is exactly
 * the on-disk NIfTI voxel order).
 */

import { gzipSync } from "node:zlib";
import { writeFileSync } from "node:fs";

const HEADER_SIZE = 348;

export interface VolumeArray {
  data: Uint8Array | Uint16Array | Int16Array | Float32Array;
  dims: [number, number, number];
  spacing?: [number, number, number];
}

function datatypeCode(data: VolumeArray["data"]): { code: number; bits: number } {
  if (data instanceof Uint8Array) return { code: 2, bits: 8 };
  if (data instanceof Int16Array) return { code: 4, bits: 16 };
  if (data instanceof Uint16Array) return { code: 512, bits: 16 };
  if (data instanceof Float32Array) return { code: 16, bits: 32 };
  throw new TypeError("unsupported array type for NIfTI export");
}

export function niftiBytes(volume: VolumeArray): Uint8Array {
  const [nz, ny, nx] = volume.dims;
  const [sz, sy, sx] = volume.spacing ?? [1, 1, 1];
  if (nz * ny * nx !== volume.data.length) {
    throw new TypeError(
      `dims ${volume.dims} imply ${nz * ny * nx} voxels, data has ${volume.data.length}`);
  }
  const { code, bits } = datatypeCode(volume.data);

  const header = new ArrayBuffer(HEADER_SIZE + 4); // header + extension flag
  const view = new DataView(header);
  view.setInt32(0, HEADER_SIZE, true);             // sizeof_hdr
  const dim = [3, nx, ny, nz, 1, 1, 1, 1];
  dim.forEach((d, i) => view.setInt16(40 + 2 * i, d, true));
  view.setInt16(70, code, true);                   // datatype
  view.setInt16(72, bits, true);                   // bitpix
  const pixdim = [1, sx, sy, sz, 0, 0, 0, 0];
  pixdim.forEach((p, i) => view.setFloat32(76 + 4 * i, p, true));
  view.setFloat32(108, HEADER_SIZE + 4, true);     // vox_offset
  view.setFloat32(112, 1, true);                   // scl_slope
  view.setFloat32(116, 0, true);                   // scl_inter
  view.setUint8(123, 2);                           // xyzt_units: millimetres
  // qform_code = sform_code = 0: the reader assumes identity orientation
  const magic = "n+1\0";
  for (let i = 0; i < 4; i++) {
    view.setUint8(344 + i, magic.charCodeAt(i));
  }

  const payload = new Uint8Array(
    volume.data.buffer, volume.data.byteOffset, volume.data.byteLength);
  const blob = new Uint8Array(header.byteLength + payload.byteLength);
  blob.set(new Uint8Array(header), 0);
  blob.set(payload, header.byteLength);
  return blob;
}

/** Write a volume to disk; a .gz suffix selects gzip compression. */
export function writeNifti(path: string, volume: VolumeArray): void {
  const blob = niftiBytes(volume);
  writeFileSync(path, path.endsWith(".gz") ? gzipSync(blob) : blob);
}
