// Region outline registry for the choropleth renderer.
//
// Ships empty: the bundled asset slot is filled by calling
// registerRegions() with real geometry at startup when an outline file is
// available. With no (or partial) coverage the choropleth renderer falls
// back to a clickable bar chart, which keeps every mark interactive.

export interface RegionShape {
  /** Region name as it appears in the data, matched case-insensitively. */
  name: string;
  /** SVG path data drawn in a 960x600 viewBox. */
  path: string;
}

const registry = new Map<string, string>();

export function registerRegions(shapes: RegionShape[]): void {
  for (const s of shapes) {
    registry.set(s.name.toLowerCase(), s.path);
  }
}

export function clearRegions(): void {
  registry.clear();
}

export function regionPath(name: string): string | undefined {
  return registry.get(name.toLowerCase());
}

export function hasAllRegions(names: string[]): boolean {
  return names.length > 0 && names.every((n) => registry.has(n.toLowerCase()));
}
