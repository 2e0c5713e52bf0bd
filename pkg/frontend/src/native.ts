// Parser for one native configs.jsonl line -- the copyable snippet on the
// config detail page is exactly such a line, and must round-trip.

export interface NativeConfigLine {
  id: number;
  values: Record<string, unknown>;
}

export function parseConfigLine(line: string): NativeConfigLine {
  let raw: unknown;
  try {
    raw = JSON.parse(line);
  } catch (err) {
    throw new Error(`config line is not valid JSON: ${err}`);
  }
  if (typeof raw !== "object" || raw === null) {
    throw new Error("config line must be a JSON object");
  }
  const obj = raw as Record<string, unknown>;
  if (typeof obj.id !== "number" || !Number.isInteger(obj.id)) {
    throw new Error("config line needs an integer 'id'");
  }
  if (typeof obj.values !== "object" || obj.values === null || Array.isArray(obj.values)) {
    throw new Error("config line needs an object 'values'");
  }
  return { id: obj.id, values: obj.values as Record<string, unknown> };
}
