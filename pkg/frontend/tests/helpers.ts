import { AttributeSchema, Fingerprint, MaterialRecord } from "../src/types.js";

const NAMES: [string, string, string][] = [
  ["color vibrancy", "dull", "vibrant"],
  ["surface roughness", "smooth", "rough"],
  ["pattern complexity", "plain", "complex"],
  ["striped pattern", "no stripes", "pronounced stripes"],
  ["checkered pattern", "no checks", "pronounced checks"],
  ["brightness", "black", "white"],
  ["shininess", "matt", "mirror"],
  ["sparkle", "none", "sparkling"],
  ["hardness", "soft", "hard"],
  ["movement effect", "none", "extreme"],
  ["pattern scale", "fine", "large"],
  ["naturalness", "manmade", "natural"],
  ["thickness", "flat", "thick"],
  ["multicolored", "single", "many"],
  ["value", "cheap", "luxurious"],
  ["warmth", "cold", "warm"],
];

export function testSchema(): AttributeSchema {
  return {
    version: "1.0",
    attributes: NAMES.map(([name, lo, hi], i) => ({
      id: i + 1,
      name,
      boundary_low: lo,
      boundary_high: hi,
      question: `How ${name}?`,
    })),
  };
}

export function fingerprint(materialId: string, values: number[], stderr?: number[]): Fingerprint {
  return { material_id: materialId, values, stderr: stderr ?? null, schema_version: "1.0" };
}

/** Deterministic pseudo-random values in [-1, 1] (mulberry32). */
export function seededValues(seed: number, n = 16): number[] {
  let a = seed >>> 0;
  const out: number[] = [];
  for (let i = 0; i < n; i++) {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    out.push(((((t ^ (t >>> 14)) >>> 0) / 4294967296) - 0.5) * 2);
  }
  return out;
}

export function materialSet(count: number): MaterialRecord[] {
  const categories = ["fabric", "wood", "metal", "coating"];
  return Array.from({ length: count }, (_, i) => {
    const id = `m${String(i).padStart(3, "0")}`;
    return {
      material_id: id,
      category: categories[i % categories.length],
      fingerprint: fingerprint(id, seededValues(1000 + i)),
      typicality: 0.5,
    };
  });
}

/** Server-side per-attribute ranking semantics: value desc, ties by id asc. */
export function rankByAttribute(materials: MaterialRecord[], attributeId: number): string[] {
  return materials
    .slice()
    .sort((a, b) => {
      const va = a.fingerprint.values[attributeId - 1];
      const vb = b.fingerprint.values[attributeId - 1];
      if (va !== vb) return vb - va;
      return a.material_id < b.material_id ? -1 : 1;
    })
    .map((m) => m.material_id);
}
