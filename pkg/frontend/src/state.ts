// ViewState <-> URL hash. The entire client state lives in the hash so
// views are linkable and reloads restore them.

export interface ViewRoute {
  kind: "view";
  target: string | null;
  plugin: string;
  inputs: Record<string, unknown>;
}

export interface DetailRoute {
  kind: "detail";
  runId: string;
  configId: number;
}

export type Route = ViewRoute | DetailRoute;

export const PLUGIN_ORDER = [
  "overview",
  "footprint",
  "budget_correlation",
  "pareto",
  "importance",
] as const;

export const DEFAULT_ROUTE: ViewRoute = {
  kind: "view",
  target: null,
  plugin: "overview",
  inputs: {},
};

export function encodeViewHash(target: string | null, plugin: string, inputs: Record<string, unknown>): string {
  const parts = [`#/view/${encodeURIComponent(target ?? "")}/${encodeURIComponent(plugin)}`];
  const keys = Object.keys(inputs);
  if (keys.length > 0) {
    parts.push(`?inputs=${encodeURIComponent(JSON.stringify(inputs))}`);
  }
  return parts.join("");
}

export function encodeDetailHash(runId: string, configId: number): string {
  return `#/detail/${encodeURIComponent(runId)}/${configId}`;
}

export function decodeHash(hash: string): Route {
  const raw = hash.startsWith("#") ? hash.slice(1) : hash;
  const [path, query] = raw.split("?", 2);
  const segments = path.split("/").filter((s) => s.length > 0);
  if (segments[0] === "detail" && segments.length === 3) {
    const configId = Number(segments[2]);
    if (Number.isInteger(configId)) {
      return { kind: "detail", runId: decodeURIComponent(segments[1]), configId };
    }
  }
  if (segments[0] === "view" && segments.length >= 3) {
    let inputs: Record<string, unknown> = {};
    if (query && query.startsWith("inputs=")) {
      try {
        const parsed = JSON.parse(decodeURIComponent(query.slice("inputs=".length)));
        if (parsed && typeof parsed === "object" && !Array.isArray(parsed)) {
          inputs = parsed as Record<string, unknown>;
        }
      } catch {
        // ignore malformed inputs; fall back to defaults
      }
    }
    const target = decodeURIComponent(segments[1]);
    const plugin = decodeURIComponent(segments[2]);
    return {
      kind: "view",
      target: target === "" ? null : target,
      plugin: (PLUGIN_ORDER as readonly string[]).includes(plugin) ? plugin : "overview",
      inputs,
    };
  }
  return { ...DEFAULT_ROUTE };
}
