// Audio alert policy: tones fire on state-color transitions, never per
// frame. Orange plays one short "elevator" chime on entry; red loops the
// alert tone until the state leaves red or the session ends.

import type { SittingState } from './protocol.js'

export type AudioEvent = 'elevator-once' | 'alert-start' | 'alert-stop'

export class AudioPolicy {
  private current: SittingState | null = null

  /** Feed every displayed state; returns the tone events to perform. */
  observe(state: SittingState): AudioEvent[] {
    const previous = this.current
    this.current = state
    if (state === previous) return []
    const events: AudioEvent[] = []
    if (previous === 'red') events.push('alert-stop')
    if (state === 'orange') events.push('elevator-once')
    if (state === 'red') events.push('alert-start')
    return events
  }

  /** Session over (logout/disconnect): silence everything. */
  reset(): AudioEvent[] {
    const wasRed = this.current === 'red'
    this.current = null
    return wasRed ? ['alert-stop'] : []
  }
}
