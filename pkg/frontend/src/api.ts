/** Typed client for the tile/query service.
 *
 * All numerics shown in the UI come from these endpoints; the client never
 * iterates the map itself.
 */

import type { Cx } from "./complex.js";
import { parseWire, toWire } from "./complex.js";

export interface Preset {
  id: string;
  rho: Cx;
  digest: string;
  center: Cx;
  width: number;
}

export interface OrbitSummary {
  verdict: string;
  iterationsUsed: number;
  points: Cx[];
}

export interface PointReport {
  lambda: Cx;
  mu: Cx;
  kind: string;
  period: number | null;
  multiplier: Cx | null;
  itinerary: number[] | null;
  sPartition: string | null;
  orbitLambda: OrbitSummary;
  orbitMu: OrbitSummary;
}

export interface CenterRecord {
  order: number;
  markedAv: string;
  itinerary: number[];
  location: Cx;
}

export class SingularParameterError extends Error {}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

type FetchLike = (url: string) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (url) => fetch(url),
  ) {}

  private async getJson(path: string): Promise<unknown> {
    const response = await this.fetchFn(this.baseUrl + path);
    if (response.status === 422) {
      throw new SingularParameterError("singular parameter");
    }
    if (!response.ok) {
      throw new ApiError(response.status, `${path} -> ${response.status}`);
    }
    return response.json();
  }

  async presets(): Promise<Preset[]> {
    const data = (await this.getJson("/presets")) as {
      presets: {
        id: string; rho: string; digest: string;
        viewport: { center: string; width: number };
      }[];
    };
    return data.presets.map((p) => ({
      id: p.id,
      rho: parseWire(p.rho),
      digest: p.digest,
      center: parseWire(p.viewport.center),
      width: p.viewport.width,
    }));
  }

  tileUrl(digest: string, z: number, x: number, y: number): string {
    return `${this.baseUrl}/tiles/param/${digest}/${z}/${x}/${y}.png`;
  }

  dynamicImageUrl(rho: Cx, lambda: Cx, px: number, center: Cx, width: number,
                  budget: number): string {
    const params = new URLSearchParams({
      rho: toWire(rho),
      lambda: toWire(lambda),
      px: String(px),
      center: toWire(center),
      width: String(width),
      budget: String(budget),
    });
    return `${this.baseUrl}/render/dynamic?${params}`;
  }

  async classify(rho: Cx, lambda: Cx): Promise<PointReport> {
    const path = `/classify?rho=${toWire(rho)}&lambda=${toWire(lambda)}`;
    const d = (await this.getJson(path)) as Record<string, any>;
    const orbit = (o: Record<string, any>): OrbitSummary => ({
      verdict: o.verdict,
      iterationsUsed: o.iterations_used,
      points: (o.points as string[]).map(parseWire),
    });
    return {
      lambda: parseWire(d.lambda),
      mu: parseWire(d.mu),
      kind: d.class.kind,
      period: d.class.period,
      multiplier: d.class.multiplier === null ? null : parseWire(d.class.multiplier),
      itinerary: d.itinerary,
      sPartition: d.s_partition,
      orbitLambda: orbit(d.orbit_lambda),
      orbitMu: orbit(d.orbit_mu),
    };
  }

  async invert(rho: Cx, lambda: Cx): Promise<Cx> {
    const path = `/invert?rho=${toWire(rho)}&lambda=${toWire(lambda)}`;
    const d = (await this.getJson(path)) as { inverted: string };
    return parseWire(d.inverted);
  }

  async centers(rho: Cx, bbox: [number, number, number, number],
                maxOrder: number): Promise<CenterRecord[]> {
    const path = `/centers?rho=${toWire(rho)}&bbox=${bbox.join(",")}` +
      `&max_order=${maxOrder}`;
    const d = (await this.getJson(path)) as { centers: Record<string, any>[] };
    return d.centers.map((c) => ({
      order: c.order,
      markedAv: c.marked_av,
      itinerary: c.itinerary,
      location: parseWire(c.location),
    }));
  }

  async sstar(rho: Cx, n: number): Promise<Cx[]> {
    const d = (await this.getJson(`/sstar?rho=${toWire(rho)}&n=${n}`)) as {
      points: string[];
    };
    return d.points.map(parseWire);
  }
}
