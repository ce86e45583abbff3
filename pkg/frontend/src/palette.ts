// Color mapping: sensor force 0-15 on a green-to-red ramp, plus the three
// sitting-state panel colors.

import type { SittingState } from './protocol.js'

export const FORCE_MAX = 15

export const STATE_COLORS: Record<SittingState, string> = {
  green: '#2f9e44',
  orange: '#f08c00',
  red: '#e03131',
}

export const STALE_GREY = '#868e96'

/** Force reading to a palette color: 0 is full green (hue 120), 15 full red (hue 0). */
export function forceColor(value: number): string {
  const clamped = Math.min(Math.max(value, 0), FORCE_MAX)
  const hue = Math.round(120 * (1 - clamped / FORCE_MAX))
  return `hsl(${hue}, 85%, 45%)`
}

/** Stops for the measuring-range scale panel, lowest force first. */
export function scaleStops(count = 8): string[] {
  const stops: string[] = []
  for (let i = 0; i < count; i += 1) {
    stops.push(forceColor((FORCE_MAX * i) / (count - 1)))
  }
  return stops
}
