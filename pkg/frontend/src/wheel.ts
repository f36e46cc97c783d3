/** The circular 12-choice response wheel.
 *
 * Geometry is pure and unit-tested: 12 sectors at 30 degree spacing,
 * label order fixed for the whole session. The DOM layer just turns
 * the geometry into SVG and forwards clicks/keys to a selection
 * callback.
 */

export const SECTOR_COUNT = 12;
export const SECTOR_SPACING_DEG = 360 / SECTOR_COUNT;

// keyboard row mapping for the 12 sectors: 1..9, 0, -, =
export const KEY_ORDER = ["1", "2", "3", "4", "5", "6", "7", "8", "9", "0",
                          "-", "="] as const;

export function assertWheelLabels(labels: string[]): void {
  if (labels.length !== SECTOR_COUNT) {
    throw new Error(`response wheel needs exactly ${SECTOR_COUNT} labels, `
      + `got ${labels.length}`);
  }
}

/** Center angle of sector k, degrees, 0 at 12 o'clock, clockwise. */
export function sectorCenterDeg(index: number): number {
  return (index * SECTOR_SPACING_DEG) % 360;
}

/** Sector index for a click at (x, y) relative to the wheel center. */
export function hitSector(x: number, y: number): number {
  // screen coordinates: y grows downward; 0 degrees at 12 o'clock
  const angle = (Math.atan2(x, -y) * 180) / Math.PI;
  const positive = (angle + 360) % 360;
  return Math.round(positive / SECTOR_SPACING_DEG) % SECTOR_COUNT;
}

export function keyToSector(key: string): number | null {
  const index = (KEY_ORDER as readonly string[]).indexOf(key);
  return index === -1 ? null : index;
}

export interface WheelSector {
  index: number;
  label: string;
  centerDeg: number;
  labelX: number;
  labelY: number;
  path: string;
}

/** Sector descriptors for rendering; radius in px, origin at center. */
export function wheelLayout(labels: string[], radius: number,
                            labelRadius: number): WheelSector[] {
  assertWheelLabels(labels);
  const toXY = (deg: number, r: number): [number, number] => {
    const rad = (deg * Math.PI) / 180;
    return [r * Math.sin(rad), -r * Math.cos(rad)];
  };
  return labels.map((label, index) => {
    const center = sectorCenterDeg(index);
    const from = center - SECTOR_SPACING_DEG / 2;
    const to = center + SECTOR_SPACING_DEG / 2;
    const [x0, y0] = toXY(from, radius);
    const [x1, y1] = toXY(to, radius);
    const [labelX, labelY] = toXY(center, labelRadius);
    const path = `M 0 0 L ${x0.toFixed(2)} ${y0.toFixed(2)} ` +
      `A ${radius} ${radius} 0 0 1 ${x1.toFixed(2)} ${y1.toFixed(2)} Z`;
    return { index, label, centerDeg: center, labelX, labelY, path };
  });
}

/** Standalone SVG markup for the wheel (deterministic for fixed labels). */
export function wheelSvg(labels: string[], radius = 220,
                         labelRadius = 165): string {
  const sectors = wheelLayout(labels, radius, labelRadius);
  const parts = sectors.map((s) =>
    `<g class="sector" data-index="${s.index}" data-label="${s.label}">` +
    `<path d="${s.path}"></path>` +
    `<text x="${s.labelX.toFixed(2)}" y="${s.labelY.toFixed(2)}" ` +
    `text-anchor="middle" dominant-baseline="middle">${s.label}</text></g>`);
  const size = radius * 2 + 4;
  return `<svg viewBox="${-size / 2} ${-size / 2} ${size} ${size}" ` +
    `width="${size}" height="${size}" class="wheel">${parts.join("")}</svg>`;
}
