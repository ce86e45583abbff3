// Pure view model for the chair display: a function of the latest chdata,
// the latest raw frame, and the connection phase. No DOM access here, so
// every rendering rule is snapshot-testable.

import type { ChData } from './protocol.js'
import { forceColor, scaleStops, STALE_GREY, STATE_COLORS } from './palette.js'

export const STALE_AFTER_MS = 5000

export interface SensorCircle {
  id: string // seat0..seat3, back0..back1
  kind: 'seat' | 'back'
  x: number // fraction of the chair image, 0..1
  y: number
  value: number
  label: string
  color: string
}

export interface ChairViewModel {
  circles: SensorCircle[]
  scale: string[] // left panel: measuring-range ramp, low force first
  statePanel: { color: string; label: string }
  freeLabel: boolean
  stale: boolean
  hint: string | null
}

// Sensor positions on the symbolic chair: backrest on top, seat below.
const POSITIONS: Array<{ id: string; kind: 'seat' | 'back'; x: number; y: number }> = [
  { id: 'seat0', kind: 'seat', x: 0.35, y: 0.55 },
  { id: 'seat1', kind: 'seat', x: 0.65, y: 0.55 },
  { id: 'seat2', kind: 'seat', x: 0.35, y: 0.85 },
  { id: 'seat3', kind: 'seat', x: 0.65, y: 0.85 },
  { id: 'back0', kind: 'back', x: 0.42, y: 0.18 },
  { id: 'back1', kind: 'back', x: 0.58, y: 0.18 },
]

export interface RenderContext {
  nowMs: number
  lastFrameAtMs: number | null
  connected: boolean
}

export function renderChair(
  chdata: ChData | null,
  frame: number[] | null,
  context: RenderContext,
): ChairViewModel {
  const stale =
    context.lastFrameAtMs === null ||
    context.nowMs - context.lastFrameAtMs > STALE_AFTER_MS
  const readings = frame && frame.length === 6 ? frame : [0, 0, 0, 0, 0, 0]

  const circles = POSITIONS.map((pos, index) => {
    const value = readings[index]
    return {
      ...pos,
      value,
      label: value.toFixed(2),
      color: stale ? STALE_GREY : forceColor(value),
    }
  })

  const free = chdata !== null && chdata.actual_sitting_status === 0
  let panelColor: string
  let panelLabel: string
  if (stale) {
    panelColor = STALE_GREY
    panelLabel = 'stale'
  } else if (chdata === null) {
    panelColor = STALE_GREY
    panelLabel = 'no data'
  } else {
    panelColor = STATE_COLORS[chdata.actual_sitting_state]
    panelLabel = free ? 'Free' : chdata.actual_sitting_state
  }

  return {
    circles,
    scale: scaleStops(),
    statePanel: { color: panelColor, label: panelLabel },
    freeLabel: free && !stale,
    stale,
    hint: stale
      ? context.connected
        ? 'no recent data - check the chair'
        : 'connection lost - reconnect?'
      : null,
  }
}
