/** Complex values and the service's "re,im" wire format. */

export interface Cx {
  re: number;
  im: number;
}

export function cx(re: number, im = 0): Cx {
  return { re, im };
}

export function parseWire(text: string): Cx {
  const parts = text.split(",");
  if (parts.length !== 2) throw new Error(`expected "re,im", got ${text}`);
  const re = Number(parts[0]);
  const im = Number(parts[1]);
  if (!Number.isFinite(re) || !Number.isFinite(im)) {
    throw new Error(`non-finite complex ${text}`);
  }
  return { re, im };
}

export function toWire(z: Cx): string {
  // String(number) is the shortest round-trip form, so wire values are exact
  return `${z.re},${z.im}`;
}

export function cxAbs(z: Cx): number {
  return Math.hypot(z.re, z.im);
}

export function cxSub(a: Cx, b: Cx): Cx {
  return { re: a.re - b.re, im: a.im - b.im };
}

export function cxEq(a: Cx, b: Cx): boolean {
  return a.re === b.re && a.im === b.im;
}

export function formatCx(z: Cx, digits = 6): string {
  const sign = z.im < 0 ? "-" : "+";
  return `${z.re.toFixed(digits)} ${sign} ${Math.abs(z.im).toFixed(digits)}i`;
}
