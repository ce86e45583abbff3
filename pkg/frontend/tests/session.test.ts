import { describe, expect, it } from 'vitest'

import { SessionController, type ChairSocket } from '../src/session.js'
import type { AppDataMsg } from '../src/protocol.js'

class FakeSocket implements ChairSocket {
  sent: string[] = []
  closed = false
  onopen: (() => void) | null = null
  onmessage: ((text: string) => void) | null = null
  onclose: (() => void) | null = null

  constructor(public url: string) {}

  send(text: string): void {
    this.sent.push(text)
  }

  close(): void {
    this.closed = true
  }
}

function makeRig() {
  const sockets: FakeSocket[] = []
  const phases: string[] = []
  const session = new SessionController(
    (url) => {
      const socket = new FakeSocket(url)
      sockets.push(socket)
      return socket
    },
    { onPhase: (p) => phases.push(p) },
    () => 12345,
  )
  return { session, sockets, phases }
}

function connectAndHello(rig: ReturnType<typeof makeRig>, chair = 1) {
  rig.session.connect('127.0.0.1', 8765, chair)
  const control = rig.sockets[0]
  control.onopen?.()
  control.onmessage?.(JSON.stringify({ hello: true, client_id: 'ws-abc' }))
  return control
}

const APP_DATA: AppDataMsg = {
  chairId: 1,
  data: [5.63, 5.7, 5.61, 5.51, 2.64, 5.71],
  sum: 30.8,
  actual_time: 1601455127,
  avg: 5.6125,
  deviation: 0.00461875,
  chdata: {
    actual_sitting_state: 'green',
    avg_deviation: 0.007,
    avg_back_deviation: 2.79,
    chair_id: 1,
    actual_sitting_time: 45,
    back_data_present: 1,
    long_sitting: 0,
    duration: 1358,
    start_time: 1601453768.362,
    sitting_history: [],
    actual_sitting_status: 1,
  },
}

describe('SessionController', () => {
  it('walks the full message sequence in order', () => {
    const rig = makeRig()
    const control = connectAndHello(rig)
    expect(rig.session.phase).toBe('Connected')
    expect(control.url).toBe('ws://127.0.0.1:8765/ws/control')

    rig.session.login()
    expect(JSON.parse(control.sent[0])).toEqual({ chairId: 1, query: 'login' })
    control.onmessage?.(JSON.stringify({ chairId: 1, query: 'login', success: true }))
    expect(rig.session.phase).toBe('LoggedIn')
    const data = rig.sockets[1]
    expect(data.url).toBe('ws://127.0.0.1:8765/ws/ch1/appData')

    data.onmessage?.(JSON.stringify(APP_DATA))
    expect(rig.session.latest?.chdata.actual_sitting_state).toBe('green')
    expect(rig.session.lastFrameAtMs).toBe(12345)

    rig.session.logout()
    control.onmessage?.(JSON.stringify({ chairId: 1, query: 'logout', success: true }))
    expect(rig.session.phase).toBe('Connected')
    expect(data.closed).toBe(true)
    expect(rig.session.latest).toBeNull()

    rig.session.disconnect()
    expect(rig.session.phase).toBe('Disconnected')
    expect(control.closed).toBe(true)

    expect(rig.session.log).toEqual([
      'CONNECT',
      'SUBSCRIBE_LOGIN',
      'PUBLISH_LOGIN',
      'LOGIN_ACK',
      'SUBSCRIBE_DATA',
      'PUBLISH_LOGOUT',
      'LOGOUT_ACK',
      'DISCONNECT',
    ])
  })

  it('rejected login (occupied chair) stays Connected with no data stream', () => {
    const rig = makeRig()
    const control = connectAndHello(rig)
    rig.session.login()
    control.onmessage?.(
      JSON.stringify({ chairId: 1, query: 'login', success: false, reason: 'occupied' }),
    )
    expect(rig.session.phase).toBe('Connected')
    expect(rig.sockets).toHaveLength(1) // no appData subscription was opened
    expect(rig.session.log).toEqual([
      'CONNECT', 'SUBSCRIBE_LOGIN', 'PUBLISH_LOGIN', 'LOGIN_ACK',
    ])
  })

  it('ignores status messages for other chairs', () => {
    const rig = makeRig()
    const control = connectAndHello(rig, 2)
    rig.session.login()
    control.onmessage?.(JSON.stringify({ chairId: 1, query: 'login', success: true }))
    expect(rig.session.phase).toBe('Connected') // chair 1 ack is not ours
    control.onmessage?.(JSON.stringify({ chairId: 2, query: 'login', success: true }))
    expect(rig.session.phase).toBe('LoggedIn')
  })

  it('lost connection drops to Disconnected and is logged', () => {
    const rig = makeRig()
    const control = connectAndHello(rig)
    rig.session.login()
    control.onmessage?.(JSON.stringify({ chairId: 1, query: 'login', success: true }))
    control.onclose?.()
    expect(rig.session.phase).toBe('Disconnected')
    expect(rig.session.log.at(-1)).toBe('CONNECTION_LOST')
    expect(rig.sockets[1].closed).toBe(true)
  })

  it('actions outside their phase are no-ops', () => {
    const rig = makeRig()
    rig.session.login()
    rig.session.logout()
    expect(rig.sockets).toHaveLength(0)
    connectAndHello(rig)
    rig.session.connect('127.0.0.1', 8765, 1) // already connected
    expect(rig.sockets).toHaveLength(1)
    rig.session.logout() // not logged in
    expect(rig.sockets[0].sent).toHaveLength(0)
  })

  it('forwards form credentials with the login request', () => {
    const rig = makeRig()
    rig.session.connect('127.0.0.1', 8765, 1, { user: 'office', password: 's3cret' })
    const control = rig.sockets[0]
    control.onopen?.()
    control.onmessage?.(JSON.stringify({ hello: true }))
    rig.session.login()
    expect(JSON.parse(control.sent[0])).toEqual({
      chairId: 1,
      query: 'login',
      user: 'office',
      password: 's3cret',
    })
  })

  it('data frames for the wrong chair are discarded', () => {
    const rig = makeRig()
    const control = connectAndHello(rig, 2)
    rig.session.login()
    control.onmessage?.(JSON.stringify({ chairId: 2, query: 'login', success: true }))
    const data = rig.sockets[1]
    data.onmessage?.(JSON.stringify(APP_DATA)) // chairId 1
    expect(rig.session.latest).toBeNull()
  })
})
