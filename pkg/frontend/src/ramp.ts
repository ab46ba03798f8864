// The map color ramp. Same stops as the service's PNG renderer, so pixels
// here match artifacts rendered server-side: -120 dBm navy through azure,
// spring green and yellow to -30 dBm red.

export const VMIN_DBM = -120;
export const VMAX_DBM = -30;

const STOPS = [0.0, 0.25, 0.5, 0.75, 1.0];
const RGB: [number, number, number][] = [
  [0, 0, 128],
  [0, 128, 255],
  [0, 255, 128],
  [255, 255, 0],
  [255, 0, 0],
];

export function rampColor(
  valueDbm: number,
  vmin = VMIN_DBM,
  vmax = VMAX_DBM,
): [number, number, number] {
  let t = (valueDbm - vmin) / (vmax - vmin);
  t = Math.min(1, Math.max(0, t));
  let k = STOPS.length - 2;
  for (let i = 0; i < STOPS.length - 1; i++) {
    if (t <= STOPS[i + 1]) {
      k = i;
      break;
    }
  }
  const f = (t - STOPS[k]) / (STOPS[k + 1] - STOPS[k]);
  const a = RGB[k];
  const b = RGB[k + 1];
  return [
    Math.round(a[0] + f * (b[0] - a[0])),
    Math.round(a[1] + f * (b[1] - a[1])),
    Math.round(a[2] + f * (b[2] - a[2])),
  ];
}

export function rampCss(valueDbm: number, vmin = VMIN_DBM, vmax = VMAX_DBM): string {
  const [r, g, b] = rampColor(valueDbm, vmin, vmax);
  return `rgb(${r},${g},${b})`;
}

/** CSS gradient stops for a legend bar, low value first. */
export function legendGradient(): string {
  const stops = STOPS.map(
    (s, i) => `rgb(${RGB[i][0]},${RGB[i][1]},${RGB[i][2]}) ${s * 100}%`,
  );
  return `linear-gradient(to right, ${stops.join(", ")})`;
}
