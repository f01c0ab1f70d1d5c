/**
 * Binary PGM (P5) decoding and pixel-block upscaling.
 *
 * The service returns the challenge image as a base64 P5 graymap, one
 * byte per lattice site (0 = '+' site, 255 = '-' site).  Upscaling is
 * strictly nearest-neighbor: every site becomes a solid integer pixel
 * block, because any interpolation blurs the domain boundaries that
 * carry the glyph shapes.
 */

/** A decoded graymap: row-major bytes, one per pixel. */
export interface Graymap {
  width: number;
  height: number;
  pixels: Uint8Array;
}

/** Decode a base64 string to raw bytes (browser- and node-safe). */
export function base64ToBytes(b64: string): Uint8Array {
  const bin = atob(b64);
  const out = new Uint8Array(bin.length);
  for (let i = 0; i < bin.length; i++) {
    out[i] = bin.charCodeAt(i);
  }
  return out;
}

/** Parse a binary P5 graymap with maxval 255. */
export function parsePgm(bytes: Uint8Array): Graymap {
  // header: "P5\n<width> <height>\n255\n" followed by raw bytes
  let pos = 0;
  const token = (): string => {
    while (pos < bytes.length && isSpace(bytes[pos])) pos++;
    const start = pos;
    while (pos < bytes.length && !isSpace(bytes[pos])) pos++;
    return String.fromCharCode(...bytes.subarray(start, pos));
  };
  if (token() !== 'P5') {
    throw new Error('not a binary P5 graymap');
  }
  const width = parseInt(token(), 10);
  const height = parseInt(token(), 10);
  const maxval = parseInt(token(), 10);
  if (!(width > 0 && height > 0)) {
    throw new Error('bad graymap dimensions');
  }
  if (maxval !== 255) {
    throw new Error(`unsupported maxval ${maxval}`);
  }
  pos++; // single whitespace byte after maxval
  const pixels = bytes.subarray(pos, pos + width * height);
  if (pixels.length !== width * height) {
    throw new Error('truncated graymap payload');
  }
  return { width, height, pixels };
}

function isSpace(b: number): boolean {
  return b === 0x20 || b === 0x0a || b === 0x0d || b === 0x09;
}

/**
 * Upscale to RGBA by an integer factor, nearest-neighbor only.
 *
 * Returns a buffer laid out like canvas ImageData, so the caller can
 * `putImageData(new ImageData(new Uint8ClampedArray(buf), w, h))`.
 */
export function upscaleRgba(
  map: Graymap,
  scale: number,
): Uint8ClampedArray<ArrayBuffer> {
  if (!Number.isInteger(scale) || scale < 1) {
    throw new Error('scale must be a positive integer');
  }
  const w = map.width * scale;
  const h = map.height * scale;
  const out = new Uint8ClampedArray(new ArrayBuffer(w * h * 4));
  for (let y = 0; y < h; y++) {
    const srcRow = Math.floor(y / scale) * map.width;
    for (let x = 0; x < w; x++) {
      const v = map.pixels[srcRow + Math.floor(x / scale)];
      const o = (y * w + x) * 4;
      out[o] = v;
      out[o + 1] = v;
      out[o + 2] = v;
      out[o + 3] = 255;
    }
  }
  return out;
}
