import { describe, expect, it } from "vitest";

import { ApiClient, SingularParameterError } from "../src/api.js";
import { parseWire, toWire } from "../src/complex.js";

import presetsFixture from "./fixtures/presets.json";
import classifyFixture from "./fixtures/classify_2_2.json";
import classifyRhoFixture from "./fixtures/classify_rho.json";
import invertFixture from "./fixtures/invert_2_2.json";
import centersFixture from "./fixtures/centers.json";
import sstarFixture from "./fixtures/sstar.json";
import singularFixture from "./fixtures/classify_singular.json";

function fixtureFetch(urls: string[]) {
  return async (url: string): Promise<Response> => {
    urls.push(url);
    const [path] = url.split("?");
    const body = (data: unknown, status = 200) =>
      new Response(JSON.stringify(data), { status });
    if (path === "/presets") return body(presetsFixture);
    if (path === "/invert") return body(invertFixture);
    if (path === "/centers") return body(centersFixture);
    if (path === "/sstar") return body(sstarFixture);
    if (path === "/classify") {
      const lambda = new URL(url, "http://x").searchParams.get("lambda")!;
      const z = parseWire(lambda);
      if (Math.hypot(z.re - 1 / 3, z.im) < 1e-6) {
        return body(singularFixture.body, singularFixture.status);
      }
      if (Math.hypot(z.re - 2, z.im - 2) < 1e-3) return body(classifyFixture);
      return body(classifyRhoFixture);
    }
    return body({ error: "not found" }, 404);
  };
}

describe("wire format", () => {
  it("round-trips complexes exactly", () => {
    for (const z of [{ re: 2, im: 2 }, { re: -0.36065573770491804, im: 0.03278688524590162 }]) {
      expect(parseWire(toWire(z))).toEqual(z);
    }
  });

  it("rejects malformed text", () => {
    expect(() => parseWire("2")).toThrow();
    expect(() => parseWire("a,b")).toThrow();
  });
});

describe("api client", () => {
  it("parses presets", async () => {
    const api = new ApiClient("", fixtureFetch([]));
    const presets = await api.presets();
    expect(presets.length).toBeGreaterThan(0);
    const p = presets[0]!;
    expect(p.rho.re).toBeCloseTo(2 / 3, 12);
    expect(p.width).toBeGreaterThan(0);
    expect(p.digest).toMatch(/^[0-9a-f]{16}$/);
  });

  it("parses a point report", async () => {
    const api = new ApiClient("", fixtureFetch([]));
    const report = await api.classify({ re: 2 / 3, im: 0 }, { re: 2, im: 2 });
    expect(report.kind).toBe("MLambda");
    expect(report.period).toBe(1);
    expect(report.itinerary).toEqual([1]);
    expect(Math.hypot(report.mu.re + 0.36065573770491804,
                      report.mu.im - 0.03278688524590162)).toBeLessThan(1e-12);
    expect(report.orbitLambda.verdict).toBe("ConvergedToCycle");
    expect(report.orbitMu.verdict).toBe("ConvergedToZero");
  });

  it("maps 422 to SingularParameterError", async () => {
    const api = new ApiClient("", fixtureFetch([]));
    await expect(api.classify({ re: 2 / 3, im: 0 }, { re: 1 / 3, im: 0 }))
      .rejects.toBeInstanceOf(SingularParameterError);
  });

  it("parses the inversion", async () => {
    const api = new ApiClient("", fixtureFetch([]));
    const z = await api.invert({ re: 2 / 3, im: 0 }, { re: 2, im: 2 });
    expect(z.re).toBeCloseTo(0.36065573770491804, 12);
    expect(z.im).toBeCloseTo(-0.03278688524590162, 12);
  });

  it("builds tile and dynamic-image urls", () => {
    const api = new ApiClient("");
    expect(api.tileUrl("abc123", 3, 1, 2)).toBe("/tiles/param/abc123/3/1/2.png");
    const url = api.dynamicImageUrl({ re: 2 / 3, im: 0 }, { re: 2, im: 2 },
                                    512, { re: 0, im: 0 }, 8, 2000);
    expect(url).toContain("/render/dynamic?");
    expect(url).toContain("lambda=2%2C2");
    expect(url).toContain("budget=2000");
  });

  it("fetches centers and the trace", async () => {
    const api = new ApiClient("", fixtureFetch([]));
    const centers = await api.centers({ re: 2 / 3, im: 0 }, [0, 4, -3, 3], 2);
    expect(centers.length).toBeGreaterThanOrEqual(11);
    expect(centers.every((c) => c.order === 2)).toBe(true);
    const trace = await api.sstar({ re: 2 / 3, im: 0 }, 16);
    expect(trace).toHaveLength(16);
    for (const z of trace) {
      expect(Math.abs(Math.hypot(z.re - 1 / 3, z.im) - 1 / 3)).toBeLessThan(1e-4);
    }
  });
});

export { fixtureFetch };
