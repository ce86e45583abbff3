// Client session state machine.
//
// Connection sequence (control channel doubles as the status subscription):
//   connect        -> open /ws/control, receive hello   [Disconnected -> Connected]
//   login          -> publish login, await ack          [Connected -> LoggedIn on success]
//   (data stream)  -> open /ws/ch{N}/appData
//   logout         -> publish logout, await ack, close data stream
//   disconnect     -> close everything                  [-> Disconnected]
//
// A rejected login (chair occupied) leaves the session Connected. A lost
// connection drops straight to Disconnected and surfaces a reconnect hint;
// there are no silent retry loops.

import type { AppDataMsg, AppStatusMsg } from './protocol.js'
import { parseAppData, parseAppStatus } from './protocol.js'

export type Phase = 'Disconnected' | 'Connected' | 'LoggedIn'

export interface ChairSocket {
  send(text: string): void
  close(): void
  onopen: (() => void) | null
  onmessage: ((text: string) => void) | null
  onclose: (() => void) | null
}

export type SocketFactory = (url: string) => ChairSocket

export interface SessionCallbacks {
  onPhase?(phase: Phase): void
  onData?(msg: AppDataMsg): void
  onStatus?(msg: AppStatusMsg): void
  onLog?(entry: string): void
}

export interface Credentials {
  user?: string
  password?: string
}

export class SessionController {
  phase: Phase = 'Disconnected'
  chairId = 0
  latest: AppDataMsg | null = null
  lastFrameAtMs: number | null = null
  readonly log: string[] = []

  private control: ChairSocket | null = null
  private data: ChairSocket | null = null
  private baseUrl = ''
  private auth: Credentials = {}
  private pendingLogin = false
  private pendingLogout = false

  constructor(
    private factory: SocketFactory,
    private callbacks: SessionCallbacks = {},
    private now: () => number = () => Date.now(),
  ) {}

  connect(server: string, port: number, chairId: number, auth: Credentials = {}): void {
    if (this.phase !== 'Disconnected') return
    this.chairId = chairId
    this.auth = auth
    this.baseUrl = `ws://${server}:${port}`
    this.record('CONNECT')
    this.control = this.factory(`${this.baseUrl}/ws/control`)
    this.control.onmessage = (text) => this.onControlMessage(text)
    this.control.onclose = () => this.onLost()
    this.control.onopen = () => this.record('SUBSCRIBE_LOGIN')
  }

  login(): void {
    if (this.phase !== 'Connected' || !this.control) return
    this.pendingLogin = true
    // credentials ride along for the bridge; the hub defines no auth scheme
    this.control.send(JSON.stringify({ chairId: this.chairId, query: 'login', ...this.auth }))
    this.record('PUBLISH_LOGIN')
  }

  logout(): void {
    if (this.phase !== 'LoggedIn' || !this.control) return
    this.pendingLogout = true
    this.control.send(JSON.stringify({ chairId: this.chairId, query: 'logout' }))
    this.record('PUBLISH_LOGOUT')
  }

  disconnect(): void {
    if (this.phase === 'Disconnected') return
    this.record('DISCONNECT')
    this.teardown('Disconnected')
  }

  private onControlMessage(text: string): void {
    let hello: { hello?: boolean } | null = null
    try {
      hello = JSON.parse(text)
    } catch {
      return
    }
    if (hello && hello.hello === true && this.phase === 'Disconnected') {
      this.setPhase('Connected')
      return
    }
    const status = parseAppStatus(text)
    if (!status || status.chairId !== this.chairId) return
    this.callbacks.onStatus?.(status)
    if (status.query === 'login' && this.pendingLogin) {
      this.pendingLogin = false
      this.record('LOGIN_ACK')
      if (status.success) {
        this.openDataStream()
        this.setPhase('LoggedIn')
      }
      // rejected (occupied): stay Connected, no data subscription
    } else if (status.query === 'logout' && this.pendingLogout) {
      this.pendingLogout = false
      this.record('LOGOUT_ACK')
      this.closeDataStream()
      this.latest = null
      this.lastFrameAtMs = null
      this.setPhase('Connected')
    }
  }

  private openDataStream(): void {
    this.data = this.factory(`${this.baseUrl}/ws/ch${this.chairId}/appData`)
    this.record('SUBSCRIBE_DATA')
    this.data.onmessage = (text) => {
      const msg = parseAppData(text)
      if (msg && msg.chairId === this.chairId) {
        this.latest = msg
        this.lastFrameAtMs = this.now()
        this.callbacks.onData?.(msg)
      }
    }
    this.data.onclose = () => {
      if (this.phase === 'LoggedIn') this.onLost()
    }
  }

  private closeDataStream(): void {
    if (this.data) {
      const socket = this.data
      this.data = null
      socket.onclose = null
      socket.close()
    }
  }

  private onLost(): void {
    if (this.phase === 'Disconnected') return
    this.record('CONNECTION_LOST')
    this.teardown('Disconnected')
  }

  private teardown(phase: Phase): void {
    this.closeDataStream()
    if (this.control) {
      const socket = this.control
      this.control = null
      socket.onclose = null
      socket.close()
    }
    this.pendingLogin = false
    this.pendingLogout = false
    this.latest = null
    this.lastFrameAtMs = null
    this.setPhase(phase)
  }

  private setPhase(phase: Phase): void {
    this.phase = phase
    this.callbacks.onPhase?.(phase)
  }

  private record(entry: string): void {
    this.log.push(entry)
    this.callbacks.onLog?.(entry)
  }
}
