// Wire types exchanged with the hub.

export type SittingState = 'green' | 'orange' | 'red'

export interface SittingEvent {
  timestamp: number
  sitting_status: 0 | 1
}

export interface ChData {
  actual_sitting_state: SittingState
  avg_deviation: number
  avg_back_deviation: number
  chair_id: number
  actual_sitting_time: number
  back_data_present: 0 | 1
  long_sitting: 0 | 1
  duration: number
  start_time: number
  sitting_history: SittingEvent[]
  actual_sitting_status: 0 | 1
}

export interface AppDataMsg {
  chairId: number
  data: number[]
  sum: number
  actual_time: number
  avg: number
  deviation: number
  chdata: ChData
}

export interface AppStatusMsg {
  chairId: number
  query: 'login' | 'logout'
  success: boolean
  reason?: string
}

const STATES: SittingState[] = ['green', 'orange', 'red']

export function parseAppData(text: string): AppDataMsg | null {
  try {
    const body = JSON.parse(text)
    if (
      typeof body?.chairId !== 'number' ||
      !Array.isArray(body?.data) ||
      body.data.length !== 6 ||
      !STATES.includes(body?.chdata?.actual_sitting_state)
    ) {
      return null
    }
    return body as AppDataMsg
  } catch {
    return null
  }
}

export function parseAppStatus(text: string): AppStatusMsg | null {
  try {
    const body = JSON.parse(text)
    if (typeof body?.chairId !== 'number' || typeof body?.success !== 'boolean') return null
    if (body.query !== 'login' && body.query !== 'logout') return null
    return body as AppStatusMsg
  } catch {
    return null
  }
}
