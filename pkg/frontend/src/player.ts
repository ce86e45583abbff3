// WebAudio tone player for the alert policy. Browser-only; the policy
// itself (audio.ts) stays pure and tested.

import type { AudioEvent } from './audio.js'

export class TonePlayer {
  private context: AudioContext | null = null
  private alertTimer: number | null = null
  muted = false

  private ctx(): AudioContext {
    this.context ??= new AudioContext()
    return this.context
  }

  private beep(freqHz: number, durationMs: number, volume = 0.08): void {
    if (this.muted) return
    try {
      const ctx = this.ctx()
      if (ctx.state === 'suspended') void ctx.resume()
      const osc = ctx.createOscillator()
      const gain = ctx.createGain()
      osc.type = 'sine'
      osc.frequency.value = freqHz
      gain.gain.value = volume
      osc.connect(gain)
      gain.connect(ctx.destination)
      osc.start()
      osc.stop(ctx.currentTime + durationMs / 1000)
    } catch {
      // audio can be blocked before a user gesture; alerts stay visual
    }
  }

  perform(events: AudioEvent[]): void {
    for (const event of events) {
      if (event === 'elevator-once') {
        this.beep(660, 180)
        setTimeout(() => this.beep(880, 180), 200)
      } else if (event === 'alert-start') {
        this.stopAlert()
        const nag = () => this.beep(1320, 350, 0.12)
        nag()
        this.alertTimer = window.setInterval(nag, 700)
      } else if (event === 'alert-stop') {
        this.stopAlert()
      }
    }
  }

  private stopAlert(): void {
    if (this.alertTimer !== null) {
      clearInterval(this.alertTimer)
      this.alertTimer = null
    }
  }
}
